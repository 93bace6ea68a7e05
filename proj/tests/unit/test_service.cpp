#include <chrono>
#include <fstream>
#include <map>
#include <thread>

#include <doctest.h>

#include "common/errors.hpp"
#include "scripted_session.hpp"
#include "service/server.hpp"

#include <httplib.h>

using namespace dcmsg;
using namespace dcmsg::service;
using nlohmann::json;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    const auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

ErrorCode config_error(const std::string& text, std::map<std::string, std::string> env = {}) {
  testing::TempDir dir;
  const auto file = dir.path / "service.conf";
  std::ofstream(file) << text << "\njournal_dir = " << (dir.path / "j").string() << "\n";
  try {
    load_config(file, env_of(std::move(env)));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a config error");
  return ErrorCode::InvalidArgument;
}

// A running service over a small synthetic dataset.
struct Running {
  testing::TempDir dir;
  ServiceConfig config;
  std::unique_ptr<Service> service;
  std::unique_ptr<httplib::Client> client;

  explicit Running(int pending_ms = 60000) {
    dataset::SyntheticConfig sc;
    sc.n_individuals = 150;
    sc.seed = 5;
    config.dataset = dir.path / "data.csv";
    dataset::save_dataset(dataset::generate_synthetic(sc), config.dataset);
    config.journal_dir = dir.path / "journal";
    config.repository = dir.path / "repository.jsonl";
    config.draws = 30;
    config.n_starts = 2;
    config.workers = 1;
    config.pending_threshold_ms = pending_ms;
    validate(config);
    restart();
  }

  void restart() {
    client.reset();
    service.reset();
    service = std::make_unique<Service>(config);
    const int port = service->bind(0);
    service->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(120, 0);
  }

  httplib::Result post(const std::string& path, const json& body = json::object(), httplib::Headers h = {}) {
    return client->Post(path, h, body.dump(), "application/json");
  }
  httplib::Result get(const std::string& path) { return client->Get(path); }

  std::string new_session(const std::string& user = "alice") {
    auto r = post("/v1/sessions", {{"user_id", user}});
    REQUIRE(r);
    REQUIRE(r->status == 201);
    return json::parse(r->body)["session_id"];
  }

  std::size_t telemetry_rows(const std::string& scope = "all") {
    auto r = get("/v1/telemetry?format=jsonl&scope=" + scope);
    REQUIRE(r);
    REQUIRE(r->status == 200);
    return session::parse_telemetry_jsonl(r->body).size();
  }
};

json mnl_spec() { return spec::to_json(spec::full_linear(spec::Family::MNL)); }

json mmnl_spec() {
  auto s = spec::full_linear(spec::Family::MMNL);
  s.attributes[0].distribution = spec::Distribution::Normal;
  return spec::to_json(s);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("file then environment") {
    testing::TempDir dir;
    const auto file = dir.path / "service.conf";
    std::ofstream(file) << "# service\nport = 9001\ndraws=100 # fewer\nseed = 7\njournal_dir = "
                        << (dir.path / "j").string() << "\n\n";
    const auto c = load_config(file, env_of({{"DCMSG_PORT", "9100"}, {"DCMSG_N_STARTS", "3"}}));
    CHECK(c.port == 9100);
    CHECK(c.draws == 100);
    CHECK(c.seed == 7);
    CHECK(c.n_starts == 3);
    CHECK(c.time_limit_seconds == 2700.0);
    CHECK(std::filesystem::is_directory(dir.path / "j"));
    const auto o = manager_options(c);
    CHECK(o.session.estimation.draws == 100);
    CHECK(o.pending_threshold == std::chrono::milliseconds(2000));
  }

  TEST_CASE("rejections") {
    CHECK(config_error("colour = blue") == ErrorCode::InvalidConfig);
    CHECK(config_error("port") == ErrorCode::InvalidConfig);
    CHECK(config_error("draws = many") == ErrorCode::InvalidConfig);
    CHECK(config_error("draws = 0") == ErrorCode::InvalidConfig);
    CHECK(config_error("time_limit_seconds = -5") == ErrorCode::InvalidConfig);
    CHECK(config_error("", {{"DCMSG_SEED", "0"}}) == ErrorCode::InvalidConfig);
    CHECK(config_error("", {{"DCMSG_PORT", "70000"}}) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("journal directory must be writable") {
    testing::TempDir dir;
    std::ofstream(dir.path / "plain") << "x";
    ServiceConfig c;
    c.journal_dir = dir.path / "plain" / "journal";
    CHECK_THROWS_AS(validate(c), Error);
  }

  TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::UnknownSession) == 404);
    CHECK(http_status(ErrorCode::UnknownModelId) == 404);
    CHECK(http_status(ErrorCode::SessionClosed) == 409);
    CHECK(http_status(ErrorCode::ModelPending) == 409);
    CHECK(http_status(ErrorCode::UnknownAction) == 400);
    CHECK(http_status(ErrorCode::InvalidSpec) == 400);
  }
}

TEST_SUITE("http") {
  TEST_CASE("health and sessions") {
    Running srv;
    auto h = srv.get("/healthz");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(srv.get("/v1/healthz")->status == 200);

    const auto a = srv.new_session(), b = srv.new_session();
    CHECK(a != b);
    auto s = srv.get("/v1/sessions/" + a);
    CHECK(s->status == 200);
    CHECK(json::parse(s->body)["user_id"] == "alice");

    auto missing = srv.get("/v1/sessions/nope");
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["error"] == "UnknownSession");
    CHECK(srv.post("/v1/sessions", {{"user_id", "bob"}, {"dataset", "other"}})->status == 404);
    CHECK(srv.post("/v1/sessions", {{"user_id", ""}})->status == 400);
    CHECK(srv.client->Post("/v1/sessions", "{not json", "application/json")->status == 400);
  }

  TEST_CASE("full game over http") {
    Running srv;
    const auto id = srv.new_session();
    const std::string base = "/v1/sessions/" + id;
    std::size_t mutations = 0;
    auto ok = [&](const httplib::Result& r, int status = 200) {
      REQUIRE(r);
      CHECK(r->status == status);
      if (r->status / 100 == 2) ++mutations;
      return json::parse(r->body);
    };

    CHECK(ok(srv.post(base + "/da/head", {{"n", 3}}))["rows"].size() == 3);
    ok(srv.post(base + "/da/summary_statistics"));
    ok(srv.post(base + "/da/correlation", {{"variables", {"cost_A", "stores_A"}}}));
    CHECK(srv.post(base + "/da/warp_drive")->status == 400);
    CHECK(srv.post(base + "/da/aic", {{"model_id", 1}})->status == 400);  // an OI tool
    CHECK(srv.post(base + "/da/histogram", {{"variable", "nope"}})->status == 400);
    ok(srv.post(base + "/ms/model", mnl_spec()));

    auto lc4 = spec::to_json(spec::full_linear(spec::Family::LC));
    lc4["n_class"] = 4;
    auto rejected = srv.post(base + "/models", lc4);
    CHECK(rejected->status == 422);
    const auto violations = json::parse(rejected->body)["violations"];
    CHECK(std::any_of(violations.begin(), violations.end(),
                      [](const json& v) { return v["constraint"] == "up to three latent classes"; }));
    CHECK(srv.post(base + "/models", {{"model", 9}})->status == 400);

    const auto m1 = ok(srv.post(base + "/models", mnl_spec(), {{"Idempotency-Key", "k1"}}), 201);
    CHECK(m1["model_id"] == 1);
    CHECK(m1["status"] == "estimated");
    auto retry = srv.post(base + "/models", mnl_spec(), {{"Idempotency-Key", "k1"}});
    CHECK(retry->status == 201);
    CHECK(json::parse(retry->body)["model_id"] == 1);

    auto no_asc = spec::full_linear(spec::Family::MNL, false);
    const auto m2 = ok(srv.post(base + "/models", spec::to_json(no_asc)), 201);
    CHECK(m2["model_id"] == 2);

    auto view = srv.get(base + "/models/1");
    CHECK(view->status == 200);
    CHECK(json::parse(view->body).contains("result"));
    CHECK(srv.get(base + "/models/9")->status == 404);
    CHECK(srv.get(base + "/models/x")->status == 404);
    CHECK(json::parse(srv.get(base + "/models")->body).size() == 2);

    const auto aic = ok(srv.post(base + "/oi/aic", {{"model_id", 1}}));
    CHECK(aic["aic"].is_number());
    ok(srv.post(base + "/oi/compare", {{"model_ids", {1, 2}}}));
    CHECK(srv.post(base + "/oi/aic", {{"model_id", 7}})->status == 404);

    CHECK(srv.post(base + "/report", {{"model_ids", json::array()}, {"text", "x"}})->status == 404);
    CHECK(srv.post(base + "/report", {{"model_ids", {1}}, {"text", " "}})->status == 400);
    ok(srv.post(base + "/report", {{"model_ids", {1}}, {"text", "ASC model preferred"}}));

    CHECK(srv.post(base + "/da/head")->status == 409);
    CHECK(srv.post(base + "/models", mnl_spec())->status == 409);

    // one telemetry row per successful mutation
    CHECK(srv.telemetry_rows(id) == mutations);
    CHECK(srv.telemetry_rows() == mutations);

    auto csv = srv.get("/v1/telemetry?scope=" + id + "&format=csv");
    CHECK(csv->get_header_value("Content-Type") == "text/csv");
    const auto events = session::parse_telemetry_csv(csv->body);
    CHECK(events.size() == mutations);
    CHECK(events.back().r_models == std::vector<int>{1});
    CHECK(srv.get("/v1/telemetry?format=xml")->status == 400);
    CHECK(srv.get("/v1/telemetry?scope=nope")->status == 404);
  }

  TEST_CASE("long estimations are pending with a poll url") {
    Running srv(1);
    const auto id = srv.new_session();
    const std::string base = "/v1/sessions/" + id;
    auto r = srv.post(base + "/models", mmnl_spec());
    REQUIRE(r);
    REQUIRE(r->status == 202);
    const auto body = json::parse(r->body);
    CHECK(body["status"] == "pending");
    const std::string poll = body["poll"];
    CHECK(poll == base + "/models/1");

    auto early = srv.post(base + "/oi/aic", {{"model_id", 1}});
    if (early->status != 200) CHECK(early->status == 409);

    json view;
    for (int i = 0; i < 600; ++i) {
      view = json::parse(srv.get(poll)->body);
      if (view["status"] != "pending") break;
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    CHECK(view["status"] == "estimated");
    CHECK(srv.post(base + "/oi/aic", {{"model_id", 1}})->status == 200);
  }

  TEST_CASE("restart restores sessions from the journal") {
    Running srv;
    const auto id = srv.new_session("carol");
    const std::string base = "/v1/sessions/" + id;
    srv.post(base + "/da/head");
    srv.post(base + "/models", mnl_spec());
    srv.post(base + "/oi/bic", {{"model_id", 1}});
    // cache hits are not part of the registry state
    auto registry = [&] {
      auto j = json::parse(srv.get(base + "/models")->body);
      for (auto& e : j) e.erase("cached");
      return j;
    };
    const auto before_models = registry();
    const auto before_log = srv.get("/v1/telemetry?format=jsonl&scope=" + id)->body;

    srv.restart();
    CHECK(srv.service->recovered_sessions() == 1);
    CHECK(registry() == before_models);
    CHECK(srv.get("/v1/telemetry?format=jsonl&scope=" + id)->body == before_log);
    CHECK(srv.post(base + "/da/head")->status == 200);
  }
}
