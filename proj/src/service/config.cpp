#include "service/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace dcmsg::service {
namespace {

constexpr const char* kKeys[] = {"host",        "port",    "dataset",    "draws",
                                  "n_starts",    "time_limit_seconds",   "seed",
                                  "journal_dir", "workers", "repository", "pending_threshold_ms"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof())
    fail(ErrorCode::InvalidConfig, "config key '" + key + "' expects a number, got '" + value + "'");
  return out;
}

// Negative input maps to 0 so that validation reports it.
template <class T>
T count(const std::string& key, const std::string& value) {
  const auto v = number<long long>(key, value);
  return v < 0 ? T{0} : static_cast<T>(v);
}

void set(ServiceConfig& c, const std::string& key, const std::string& value) {
  if (key == "host") c.host = value;
  else if (key == "port") c.port = number<int>(key, value);
  else if (key == "dataset") c.dataset = value;
  else if (key == "draws") c.draws = count<std::size_t>(key, value);
  else if (key == "n_starts") c.n_starts = number<int>(key, value);
  else if (key == "time_limit_seconds") c.time_limit_seconds = number<double>(key, value);
  else if (key == "seed") c.seed = count<std::uint64_t>(key, value);
  else if (key == "journal_dir") c.journal_dir = value;
  else if (key == "workers") c.workers = count<unsigned>(key, value);
  else if (key == "repository") c.repository = value;
  else if (key == "pending_threshold_ms") c.pending_threshold_ms = number<int>(key, value);
  else fail(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

void apply_config_text(ServiceConfig& config, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::InvalidConfig, "config line " + std::to_string(number) + ": expected key = value");
    set(config, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
}

void apply_env(ServiceConfig& config, const EnvLookup& env) {
  for (const char* key : kKeys) {
    std::string name = "DCMSG_";
    for (const char* p = key; *p; ++p) name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (auto v = env(name)) set(config, key, *v);
  }
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  ServiceConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) fail(ErrorCode::Io, "cannot read config file " + file->string());
    std::ostringstream s;
    s << in.rdbuf();
    apply_config_text(c, s.str());
  }
  apply_env(c, env);
  validate(c);
  return c;
}

void validate(const ServiceConfig& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidConfig, std::string(what) + " must be positive");
  };
  require(c.port > 0 && c.port <= 65535, "port");
  require(c.draws > 0, "draws");
  require(c.n_starts > 0, "n_starts");
  require(c.time_limit_seconds > 0, "time_limit_seconds");
  require(c.seed > 0, "seed");
  require(c.pending_threshold_ms > 0, "pending_threshold_ms");
  if (c.host.empty()) fail(ErrorCode::InvalidConfig, "host must not be empty");

  std::error_code ec;
  std::filesystem::create_directories(c.journal_dir, ec);
  const auto probe = c.journal_dir / ".write-test";
  {
    std::ofstream out(probe);
    if (ec || !out) fail(ErrorCode::InvalidConfig, "journal directory " + c.journal_dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

session::ManagerOptions manager_options(const ServiceConfig& c) {
  session::ManagerOptions o;
  o.session.time_limit_seconds = c.time_limit_seconds;
  o.session.estimation.draws = c.draws;
  o.session.estimation.n_starts = c.n_starts;
  o.session.estimation.seed = c.seed;
  o.workers = c.workers;
  o.pending_threshold = std::chrono::milliseconds(c.pending_threshold_ms);
  o.journal_dir = c.journal_dir;
  return o;
}

}  // namespace dcmsg::service
