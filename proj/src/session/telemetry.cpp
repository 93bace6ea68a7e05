#include "session/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "common/csv.hpp"
#include "common/errors.hpp"
#include "common/numeric.hpp"

namespace dcmsg::session {
namespace {

using nlohmann::json;

std::array<std::string, kSpecFieldCount> build_spec_fields() {
  std::array<std::string, kSpecFieldCount> names;
  std::size_t k = 0;
  names[k++] = "model";
  names[k++] = "ASC";
  for (const char* prefix : {"att_", "s_", "t_", "int_", "dist_"})
    for (int i = 1; i <= 6; ++i) names[k++] = prefix + std::to_string(i);
  names[k++] = "n_class";
  for (int i = 1; i <= 6; ++i) names[k++] = "covariates_" + std::to_string(i);
  return names;
}

const std::vector<std::string>& aux_columns() {
  static const std::vector<std::string> cols = {
      "session_id", "seq", "action", "phase", "status", "overtime", "n_params",
      "ll_final", "aic", "bic", "rho2", "adj_rho2"};
  return cols;
}

std::string format_optional(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? format_double(*v) : std::string();
}

[[noreturn]] void schema_error(const std::string& what) { fail(ErrorCode::SchemaMismatch, what); }

template <class T>
T parse_number(std::string_view text, std::string_view column) {
  T value{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    schema_error("column " + std::string(column) + ": cannot read '" + std::string(text) + "'");
  return value;
}

std::optional<double> parse_optional(std::string_view text, std::string_view column) {
  if (text.empty()) return std::nullopt;
  return parse_number<double>(text, column);
}

std::string join_models(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::vector<int> split_models(std::string_view text) {
  std::vector<int> ids;
  while (!text.empty()) {
    const auto pos = text.find(';');
    ids.push_back(parse_number<int>(text.substr(0, pos), "r_models"));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return ids;
}

json optional_json(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

std::optional<double> optional_from_json(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) schema_error(std::string("field ") + key + " is not a number");
  return it->get<double>();
}

}  // namespace

const std::array<std::string, kSpecFieldCount>& spec_field_names() {
  static const auto names = build_spec_fields();
  return names;
}

SpecCodes spec_codes(const spec::ModelSpecification& s) {
  const json j = spec::to_json(s);
  SpecCodes codes{};
  const auto& names = spec_field_names();
  for (std::size_t k = 0; k < kSpecFieldCount; ++k) codes[k] = j.at(names[k]).get<int>();
  return codes;
}

spec::ModelSpecification spec_from_codes(const SpecCodes& codes) {
  json j = json::object();
  const auto& names = spec_field_names();
  for (std::size_t k = 0; k < kSpecFieldCount; ++k) j[names[k]] = codes[k];
  return spec::spec_from_json(j);
}

std::string format_timestamp(std::int64_t epoch_ms) {
  std::int64_t secs = epoch_ms / 1000;
  std::int64_t ms = epoch_ms % 1000;
  if (ms < 0) {
    ms += 1000;
    --secs;
  }
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::int64_t parse_timestamp(std::string_view text) {
  const std::string s(text);
  std::tm tm{};
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed) != 6 ||
      consumed != 19)
    fail(ErrorCode::MalformedFile, "bad timestamp '" + s + "'");
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::int64_t ms = 0;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      if (digits < 3) ms = ms * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) fail(ErrorCode::MalformedFile, "bad timestamp '" + s + "'");
    for (; digits < 3; ++digits) ms *= 10;
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) fail(ErrorCode::MalformedFile, "bad timestamp '" + s + "'");
  return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
}

const std::vector<std::string>& core_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"timestamp", "user_id", "task_id", "model_id"};
    for (const auto& n : spec_field_names()) c.push_back(n);
    c.push_back("r_models");
    c.push_back("reporting");
    return c;
  }();
  return cols;
}

const std::vector<std::string>& export_columns() {
  static const std::vector<std::string> cols = [] {
    auto c = core_columns();
    for (const auto& a : aux_columns()) c.push_back(a);
    return c;
  }();
  return cols;
}

void sort_for_export(std::vector<TelemetryEvent>& events) {
  std::stable_sort(events.begin(), events.end(), [](const TelemetryEvent& a, const TelemetryEvent& b) {
    return std::tie(a.user_id, a.timestamp_ms, a.session_id, a.seq) <
           std::tie(b.user_id, b.timestamp_ms, b.session_id, b.seq);
  });
}

std::string to_csv(const std::vector<TelemetryEvent>& events) {
  std::string out = csv::join_row(export_columns()) + "\n";
  for (const auto& e : events) {
    std::vector<std::string> f;
    f.reserve(export_columns().size());
    f.push_back(format_timestamp(e.timestamp_ms));
    f.push_back(e.user_id);
    f.push_back(std::to_string(e.task_id));
    f.push_back(std::to_string(e.model_id));
    for (int c : e.spec) f.push_back(std::to_string(c));
    f.push_back(join_models(e.r_models));
    f.push_back(e.reporting);
    f.push_back(e.session_id);
    f.push_back(std::to_string(e.seq));
    f.push_back(e.action);
    f.emplace_back(phase_name(e.phase));
    f.push_back(e.status);
    f.push_back(e.overtime ? "1" : "0");
    for (const auto* v : {&e.n_params, &e.ll_final, &e.aic, &e.bic, &e.rho2, &e.adj_rho2})
      f.push_back(format_optional(*v));
    out += csv::join_row(f);
    out += '\n';
  }
  return out;
}

json to_json(const TelemetryEvent& e) {
  json j = json::object();
  j["timestamp"] = format_timestamp(e.timestamp_ms);
  j["user_id"] = e.user_id;
  j["task_id"] = e.task_id;
  j["model_id"] = e.model_id;
  const auto& names = spec_field_names();
  for (std::size_t k = 0; k < kSpecFieldCount; ++k) j[names[k]] = e.spec[k];
  j["r_models"] = e.r_models;
  j["reporting"] = e.reporting;
  j["session_id"] = e.session_id;
  j["seq"] = e.seq;
  j["action"] = e.action;
  j["phase"] = phase_name(e.phase);
  j["status"] = e.status;
  j["overtime"] = e.overtime;
  j["n_params"] = optional_json(e.n_params);
  j["ll_final"] = optional_json(e.ll_final);
  j["aic"] = optional_json(e.aic);
  j["bic"] = optional_json(e.bic);
  j["rho2"] = optional_json(e.rho2);
  j["adj_rho2"] = optional_json(e.adj_rho2);
  return j;
}

TelemetryEvent event_from_json(const json& j) {
  if (!j.is_object()) schema_error("telemetry record must be an object");
  for (const auto& c : export_columns())
    if (!j.contains(c)) schema_error("missing field " + c);
  TelemetryEvent e;
  try {
    e.timestamp_ms = parse_timestamp(j.at("timestamp").get<std::string>());
    e.user_id = j.at("user_id").get<std::string>();
    e.task_id = j.at("task_id").get<int>();
    e.model_id = j.at("model_id").get<int>();
    const auto& names = spec_field_names();
    for (std::size_t k = 0; k < kSpecFieldCount; ++k) e.spec[k] = j.at(names[k]).get<int>();
    e.r_models = j.at("r_models").get<std::vector<int>>();
    e.reporting = j.at("reporting").get<std::string>();
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::int64_t>();
    e.action = j.at("action").get<std::string>();
    e.phase = parse_phase(j.at("phase").get<std::string>());
    e.status = j.at("status").get<std::string>();
    e.overtime = j.at("overtime").get<bool>();
  } catch (const json::exception& ex) {
    schema_error(std::string("telemetry record: ") + ex.what());
  } catch (const Error& ex) {
    schema_error(ex.what());
  }
  e.n_params = optional_from_json(j, "n_params");
  e.ll_final = optional_from_json(j, "ll_final");
  e.aic = optional_from_json(j, "aic");
  e.bic = optional_from_json(j, "bic");
  e.rho2 = optional_from_json(j, "rho2");
  e.adj_rho2 = optional_from_json(j, "adj_rho2");
  return e;
}

std::string to_jsonl(const std::vector<TelemetryEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<TelemetryEvent> parse_telemetry_csv(std::string_view text) {
  std::vector<std::vector<std::string>> table;
  try {
    table = csv::parse(text);
  } catch (const Error& ex) {
    schema_error(ex.what());
  }
  if (table.empty()) schema_error("telemetry file has no header");
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < table[0].size(); ++c) index[table[0][c]] = c;
  for (const auto& c : export_columns())
    if (!index.count(c)) schema_error("missing column " + c);

  std::vector<TelemetryEvent> events;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != table[0].size())
      schema_error("row " + std::to_string(r) + " has " + std::to_string(row.size()) + " fields");
    auto cell = [&](const std::string& name) -> const std::string& { return row[index.at(name)]; };
    TelemetryEvent e;
    try {
      e.timestamp_ms = parse_timestamp(cell("timestamp"));
      e.phase = parse_phase(cell("phase"));
    } catch (const Error& ex) {
      schema_error(ex.what());
    }
    e.user_id = cell("user_id");
    e.task_id = parse_number<int>(cell("task_id"), "task_id");
    e.model_id = parse_number<int>(cell("model_id"), "model_id");
    const auto& names = spec_field_names();
    for (std::size_t k = 0; k < kSpecFieldCount; ++k) e.spec[k] = parse_number<int>(cell(names[k]), names[k]);
    e.r_models = split_models(cell("r_models"));
    e.reporting = cell("reporting");
    e.session_id = cell("session_id");
    e.seq = parse_number<std::int64_t>(cell("seq"), "seq");
    e.action = cell("action");
    e.status = cell("status");
    const auto& ot = cell("overtime");
    if (ot != "0" && ot != "1") schema_error("column overtime: cannot read '" + ot + "'");
    e.overtime = ot == "1";
    e.n_params = parse_optional(cell("n_params"), "n_params");
    e.ll_final = parse_optional(cell("ll_final"), "ll_final");
    e.aic = parse_optional(cell("aic"), "aic");
    e.bic = parse_optional(cell("bic"), "bic");
    e.rho2 = parse_optional(cell("rho2"), "rho2");
    e.adj_rho2 = parse_optional(cell("adj_rho2"), "adj_rho2");
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<TelemetryEvent> parse_telemetry_jsonl(std::string_view text) {
  std::vector<TelemetryEvent> events;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      schema_error(std::string("bad JSON line: ") + ex.what());
    }
    events.push_back(event_from_json(j));
  }
  return events;
}

}  // namespace dcmsg::session
