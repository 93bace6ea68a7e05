#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "scripted_session.hpp"

#include <httplib.h>

extern char** environ;

using nlohmann::json;

namespace {

const std::string kCli = DCMSG_CLI;
const std::filesystem::path kFixtures = DCMSG_FIXTURE_DIR;

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Runs the CLI with stdout/stderr captured into `out`; returns its exit code.
int run(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = quote(kCli) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string text;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, p)) text.append(buf, n);
  const int status = pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// `dcmsg serve` as a child process.
struct Server {
  pid_t pid = -1;
  int port = 0;

  explicit Server(const std::filesystem::path& config) {
    int fds[2];
    REQUIRE(pipe(fds) == 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    const std::string conf = config.string();
    std::vector<char*> argv = {const_cast<char*>(kCli.c_str()), const_cast<char*>("serve"),
                               const_cast<char*>("--config"), const_cast<char*>(conf.c_str()),
                               const_cast<char*>("--port"), const_cast<char*>("0"), nullptr};
    REQUIRE(posix_spawn(&pid, kCli.c_str(), &actions, nullptr, argv.data(), environ) == 0);
    posix_spawn_file_actions_destroy(&actions);
    close(fds[1]);
    std::string line;
    char c;
    while (read(fds[0], &c, 1) == 1 && c != '\n') line += c;
    close(fds[0]);
    REQUIRE(line.rfind("listening on port ", 0) == 0);
    port = std::stoi(line.substr(18));
  }

  int stop() {
    kill(pid, SIGTERM);
    int status = 0;
    waitpid(pid, &status, 0);
    pid = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  ~Server() {
    if (pid > 0) stop();
  }
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("--frobnicate") == 1);
  CHECK(run("generate-data --seed 1") == 1);            // --out missing
  CHECK(run("generate-data --seed -3 --out x.csv") == 1);
  CHECK(run("analyze --export /nonexistent.csv --out r") == 1);
  CHECK(run("analyze --export x --rule r2 --out r") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("generate-data is deterministic") {
  testing::TempDir dir;
  const auto a = dir.path / "a.csv", b = dir.path / "b.csv", c = dir.path / "c.csv";
  std::string out;
  REQUIRE(run("generate-data --seed 1 --individuals 40 --out " + quote(a.string()), &out) == 0);
  CHECK(json::parse(out)["n_individuals"] == 40);
  REQUIRE(run("generate-data --seed 1 --individuals 40 --out " + quote(b.string())) == 0);
  REQUIRE(run("generate-data --seed 2 --individuals 40 --out " + quote(c.string())) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(run("generate-data --out /nonexistent/dir/x.csv") == 2);
}

TEST_CASE("analyze writes a report for the fixture log") {
  testing::TempDir dir;
  std::string out;
  REQUIRE(run("analyze --export " + quote((kFixtures / "five_user_log.csv").string()) +
                  " --min-support 0.7 --out " + quote(dir.path.string()),
              &out) == 0);
  CHECK(json::parse(out)["users"] == 5);
  CHECK(slurp(dir.path / "transitions.csv") == slurp(kFixtures / "five_user_transitions.csv"));
  CHECK(slurp(dir.path / "patterns.csv").rfind("pattern,length,support,users,occurrences\n", 0) == 0);

  // a dataset is not a telemetry export
  const auto data = dir.path / "d.csv";
  REQUIRE(run("generate-data --individuals 5 --out " + quote(data.string())) == 0);
  CHECK(run("analyze --export " + quote(data.string()) + " --out " + quote(dir.path.string()), &out) == 2);
  CHECK(out.find("SchemaMismatch") != std::string::npos);
}

TEST_CASE("precompute fills the repository") {
  testing::TempDir dir;
  const auto data = dir.path / "d.csv", repo = dir.path / "repo.jsonl";
  REQUIRE(run("generate-data --individuals 80 --out " + quote(data.string())) == 0);
  std::string out;
  REQUIRE(run("precompute --data " + quote(data.string()) + " --repository " + quote(repo.string()) +
                  " --draws 20 --starts 2 --workers 1 --limit 2",
              &out) == 0);
  const auto stats = json::parse(out);
  CHECK(stats["specs"] == 2);
  CHECK(stats["estimated"].get<int>() + stats["failed"].get<int>() == 2);
  CHECK(std::filesystem::file_size(repo) > 0);
}

TEST_CASE("serve, then replay the journal") {
  testing::TempDir dir;
  const auto data = dir.path / "d.csv", journal = dir.path / "journal", conf = dir.path / "service.conf";
  REQUIRE(run("generate-data --individuals 100 --out " + quote(data.string())) == 0);
  std::ofstream(conf) << "dataset = " << data.string() << "\njournal_dir = " << journal.string()
                      << "\ndraws = 20\nn_starts = 2\nworkers = 1\n";

  std::string id, telemetry;
  {
    Server server(conf);
    httplib::Client client("127.0.0.1", server.port);
    client.set_read_timeout(120, 0);
    auto r = client.Post("/v1/sessions", R"({"user_id": "erin"})", "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 201);
    id = json::parse(r->body)["session_id"];
    const std::string base = "/v1/sessions/" + id;
    CHECK(client.Post(base + "/da/choice_shares", "{}", "application/json")->status == 200);
    const auto spec = R"({"model":1,"ASC":1,"att_1":1,"att_2":1,"att_3":1,"att_4":1,"att_5":1,"att_6":1})";
    CHECK(client.Post(base + "/models", spec, "application/json")->status == 201);
    CHECK(client.Post(base + "/oi/rho2", R"({"model_id": 1})", "application/json")->status == 200);
    CHECK(client.Post(base + "/report", R"({"model_ids": [1], "text": "done"})", "application/json")->status == 200);
    telemetry = client.Get("/v1/telemetry?format=jsonl&scope=" + id)->body;
    CHECK(server.stop() == 0);
  }

  const auto file = journal / (id + ".jsonl");
  REQUIRE(std::filesystem::exists(file));
  const auto state_file = dir.path / "state.json";
  REQUIRE(run("replay --journal " + quote(file.string()) + " --data " + quote(data.string()) + " --out " +
              quote(state_file.string())) == 0);
  const auto state = json::parse(slurp(state_file));
  CHECK(state["models"].size() == 1);
  CHECK(state["models"][0]["status"] == "estimated");
  CHECK(state["summary"]["closed"] == true);
  std::string rebuilt;
  for (const auto& e : state["telemetry"]) rebuilt += e.dump() + "\n";
  CHECK(rebuilt == telemetry);
}
