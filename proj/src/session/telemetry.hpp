#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "session/actions.hpp"
#include "spec/model_spec.hpp"

namespace dcmsg::session {

// model, ASC, att_1..6, s_1..6, t_1..6, int_1..6, dist_1..6, n_class, covariates_1..6
inline constexpr std::size_t kSpecFieldCount = 39;
using SpecCodes = std::array<int, kSpecFieldCount>;

const std::array<std::string, kSpecFieldCount>& spec_field_names();
SpecCodes spec_codes(const spec::ModelSpecification& spec);
spec::ModelSpecification spec_from_codes(const SpecCodes& codes);

struct TelemetryEvent {
  std::int64_t timestamp_ms = 0;  // Unix epoch, UTC
  std::string user_id;
  int task_id = 0;
  int model_id = 0;
  SpecCodes spec{};  // zero-filled outside MS
  std::vector<int> r_models;
  std::string reporting;

  // Auxiliary columns, appended after the core ones.
  std::string session_id;
  std::int64_t seq = 0;  // position in the session log, from 1
  std::string action;
  Phase phase = Phase::DA;
  std::string status;  // estimate events: estimated, misspecified or pending
  bool overtime = false;
  std::optional<double> n_params;
  std::optional<double> ll_final;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> rho2;
  std::optional<double> adj_rho2;

  bool operator==(const TelemetryEvent&) const = default;
};

// "2024-05-13T09:30:00.250Z"
std::string format_timestamp(std::int64_t epoch_ms);
// Accepts the format above; a missing fraction or zone suffix is tolerated.
// Throws MalformedFile.
std::int64_t parse_timestamp(std::string_view text);

const std::vector<std::string>& core_columns();
const std::vector<std::string>& export_columns();  // core followed by auxiliary

// Sorted by (user_id, timestamp, session_id, seq).
void sort_for_export(std::vector<TelemetryEvent>& events);

std::string to_csv(const std::vector<TelemetryEvent>& events);  // header always written
std::string to_jsonl(const std::vector<TelemetryEvent>& events);

nlohmann::json to_json(const TelemetryEvent& e);
TelemetryEvent event_from_json(const nlohmann::json& j);

// Throw SchemaMismatch when a column is missing or a value cannot be read.
std::vector<TelemetryEvent> parse_telemetry_csv(std::string_view text);
std::vector<TelemetryEvent> parse_telemetry_jsonl(std::string_view text);

}  // namespace dcmsg::session
