#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "session/manager.hpp"

namespace dcmsg::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path dataset;  // empty: synthetic data from `seed`
  std::size_t draws = 250;
  int n_starts = 5;
  double time_limit_seconds = 2700.0;
  std::uint64_t seed = 1;
  std::filesystem::path journal_dir = "journal";
  unsigned workers = 0;  // 0 = hardware threads
  std::filesystem::path repository;  // empty: in-memory only
  int pending_threshold_ms = 2000;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

// Applies `key = value` lines (# comments) to `config`. Unknown keys and bad
// values raise InvalidConfig.
void apply_config_text(ServiceConfig& config, std::string_view text);

// Applies DCMSG_<KEY> variables, e.g. DCMSG_PORT=9000.
void apply_env(ServiceConfig& config, const EnvLookup& env = process_env);

// Defaults, then the file (when given), then the environment; validated.
ServiceConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

// Numeric fields positive, journal directory creatable and writable.
void validate(const ServiceConfig& config);

session::ManagerOptions manager_options(const ServiceConfig& config);

}  // namespace dcmsg::service
