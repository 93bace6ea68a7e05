#include "session/session.hpp"

#include <algorithm>
#include <set>

#include "common/errors.hpp"
#include "post/post_estimation.hpp"
#include "session/tools.hpp"

namespace dcmsg::session {

using nlohmann::json;

json to_json(const SessionConfig& c) {
  const auto& o = c.estimation;
  return {{"time_limit_seconds", c.time_limit_seconds},
          {"draws", o.draws},
          {"n_starts", o.n_starts},
          {"seed", o.seed},
          {"threads", o.threads},
          {"tolerance", o.tolerance},
          {"max_iterations", o.max_iterations},
          {"covariance", o.covariance}};
}

SessionConfig session_config_from_json(const json& j) {
  SessionConfig c;
  auto& o = c.estimation;
  try {
    c.time_limit_seconds = j.value("time_limit_seconds", c.time_limit_seconds);
    o.draws = j.value("draws", o.draws);
    o.n_starts = j.value("n_starts", o.n_starts);
    o.seed = j.value("seed", o.seed);
    o.threads = j.value("threads", o.threads);
    o.tolerance = j.value("tolerance", o.tolerance);
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.covariance = j.value("covariance", o.covariance);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("session config: ") + e.what());
  }
  return c;
}

JobOutcome execute(const EstimationJob& job, ModelRepository& repo) {
  try {
    auto [result, hit] = repo.get_or_compute(job.key, [&job] { return est::estimate(job.spec, *job.data, job.options); });
    return {std::move(result), hit, {}};
  } catch (const Error& e) {
    return {nullptr, false, std::string(error_code_name(e.code())) + ": " + e.what()};
  }
}

Session::Session(std::string session_id, std::string user_id, std::string dataset_ref,
                 std::shared_ptr<const dataset::ChoiceDataset> data, SessionConfig config,
                 std::shared_ptr<Clock> clock)
    : id_(std::move(session_id)),
      user_id_(std::move(user_id)),
      dataset_ref_(std::move(dataset_ref)),
      data_(std::move(data)),
      config_(std::move(config)),
      clock_(std::move(clock)) {
  if (!data_) fail(ErrorCode::UnknownDataset, "session needs a dataset");
  if (!clock_) clock_ = std::make_shared<SystemClock>();
  init_time_ = clock_->now_ms();
}

const ModelEntry& Session::model(int model_id) const {
  if (model_id < 1 || static_cast<std::size_t>(model_id) > models_.size())
    fail(ErrorCode::UnknownModelId, "no model with id " + std::to_string(model_id));
  return models_[static_cast<std::size_t>(model_id - 1)];
}

json Session::create_record() const {
  return {{"op", "create"},
          {"session_id", id_},
          {"user_id", user_id_},
          {"dataset", dataset_ref_},
          {"config", to_json(config_)},
          {"time_ms", init_time_}};
}

void Session::journal(json record) const {
  if (journal_) journal_->append(record);
}

void Session::require_open() const {
  if (closed()) fail(ErrorCode::SessionClosed, "session " + id_ + " has been closed by its report");
}

TelemetryEvent& Session::log_event(Phase phase, std::string action, int task_id) {
  std::int64_t ts = clock_->now_ms();
  if (!events_.empty()) ts = std::max(ts, events_.back().timestamp_ms);
  TelemetryEvent e;
  e.timestamp_ms = ts;
  e.user_id = user_id_;
  e.task_id = task_id;
  e.session_id = id_;
  e.seq = static_cast<std::int64_t>(events_.size()) + 1;
  e.action = std::move(action);
  e.phase = phase;
  e.overtime = static_cast<double>(ts - init_time_) > config_.time_limit_seconds * 1000.0;
  phase_ = phase;
  events_.push_back(std::move(e));
  return events_.back();
}

json Session::record_action(Phase phase, std::string_view action, const json& payload) {
  require_open();
  const ActionDef& def = find_action(phase, action);
  if (def.name == kEstimateAction || def.name == kReportAction)
    fail(ErrorCode::UnknownAction, std::string(action) + " has its own request");

  json result;
  SpecCodes codes{};
  int model_id = 0;
  switch (phase) {
    case Phase::DA:
      result = run_da_tool(def.name, payload, data_);
      break;
    case Phase::OI:
      result = run_oi_tool(def.name, payload, models_);
      break;
    case Phase::MS: {
      const auto form = spec::spec_from_json(payload.is_null() ? json::object() : payload);
      codes = spec_codes(form);
      model_id = static_cast<int>(models_.size()) + 1;
      result = {{"model_id", model_id}, {"form", spec::to_json(form)}};
      break;
    }
    case Phase::R:
      fail(ErrorCode::UnknownAction, "reports are submitted with submit_report");
  }

  TelemetryEvent& e = log_event(phase, def.name, def.task_id);
  e.model_id = model_id;
  e.spec = codes;
  journal({{"op", "action"},
           {"phase", phase_name(phase)},
           {"action", def.name},
           {"payload", payload},
           {"time_ms", e.timestamp_ms}});
  return result;
}

EstimationJob Session::begin_estimation(const spec::ModelSpecification& s, const std::string& idempotency_key) {
  require_open();
  spec::require_valid(s);
  if (!idempotency_key.empty() && idempotency_.count(idempotency_key))
    fail(ErrorCode::InvalidArgument, "idempotency key already used");

  EstimationJob job;
  job.model_id = static_cast<int>(models_.size()) + 1;
  job.spec = s;
  job.data = data_;
  job.options = config_.estimation;
  job.key = repository_key(*data_, s, job.options);

  ModelEntry entry;
  entry.model_id = job.model_id;
  entry.spec = s;
  models_.push_back(std::move(entry));
  pending_.emplace(job.model_id, job);
  if (!idempotency_key.empty()) idempotency_.emplace(idempotency_key, job.model_id);

  TelemetryEvent& e = log_event(Phase::MS, std::string(kEstimateAction), 0);
  e.model_id = job.model_id;
  e.spec = spec_codes(s);
  journal({{"op", "estimate"},
           {"spec", spec::to_json(s)},
           {"idempotency_key", idempotency_key},
           {"time_ms", e.timestamp_ms}});
  return job;
}

std::optional<int> Session::model_for_key(const std::string& idempotency_key) const {
  const auto it = idempotency_.find(idempotency_key);
  if (it == idempotency_.end()) return std::nullopt;
  return it->second;
}

void Session::finish(int model_id, const JobOutcome& outcome) {
  model(model_id);
  auto& entry = models_[static_cast<std::size_t>(model_id - 1)];
  if (entry.status != ModelStatus::Pending) return;
  entry.result = outcome.result;
  entry.cached = outcome.cached;
  if (outcome.result) {
    entry.status = est::is_misspecified(outcome.result->status) ? ModelStatus::Misspecified : ModelStatus::Estimated;
    entry.message = entry.status == ModelStatus::Misspecified ? outcome.result->message : std::string();
  } else {
    entry.status = ModelStatus::Misspecified;
    entry.message = outcome.message;
  }
  pending_.erase(model_id);
}

std::vector<EstimationJob> Session::pending_jobs() const {
  std::vector<EstimationJob> jobs;
  for (const auto& [id, job] : pending_) jobs.push_back(job);
  return jobs;
}

void Session::submit_report(std::vector<int> model_ids, std::string text) {
  require_open();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) fail(ErrorCode::EmptyReport, "report text is empty");
  if (model_ids.empty()) fail(ErrorCode::UnknownModelId, "a report cites at least one model");
  std::set<int> seen;
  for (int id : model_ids) {
    if (model(id).status != ModelStatus::Estimated)
      fail(ErrorCode::UnknownModelId, "model " + std::to_string(id) + " was not successfully estimated");
    if (!seen.insert(id).second) fail(ErrorCode::InvalidArgument, "model " + std::to_string(id) + " cited twice");
  }
  TelemetryEvent& e = log_event(Phase::R, std::string(kReportAction), 0);
  e.r_models = model_ids;
  e.reporting = text;
  end_time_ = e.timestamp_ms;
  report_ = Report{std::move(model_ids), std::move(text)};
  journal({{"op", "report"}, {"model_ids", report_->model_ids}, {"text", report_->text}, {"time_ms", e.timestamp_ms}});
}

std::vector<TelemetryEvent> Session::telemetry() const {
  std::vector<TelemetryEvent> out = events_;
  for (auto& e : out) {
    if (e.action != kEstimateAction || e.model_id < 1) continue;
    const auto& entry = model(e.model_id);
    e.status = model_status_name(entry.status);
    if (!entry.result) continue;
    const auto m = post::fit_metrics(*entry.result);
    e.n_params = static_cast<double>(m.n_params);
    e.ll_final = m.ll_final;
    e.aic = m.aic;
    e.bic = m.bic;
    e.rho2 = m.rho2;
    e.adj_rho2 = m.adj_rho2;
  }
  return out;
}

json Session::summary() const {
  json models = json::array();
  for (const auto& m : models_) models.push_back(entry_brief(m));
  const std::int64_t now = end_time_ ? *end_time_ : std::max(clock_->now_ms(), init_time_);
  const double elapsed = static_cast<double>(now - init_time_) / 1000.0;
  json j = {{"session_id", id_},
            {"user_id", user_id_},
            {"dataset", dataset_ref_},
            {"phase", phase_name(phase_)},
            {"init_time", format_timestamp(init_time_)},
            {"end_time", end_time_ ? json(format_timestamp(*end_time_)) : json(nullptr)},
            {"closed", closed()},
            {"time_limit_seconds", config_.time_limit_seconds},
            {"elapsed_seconds", elapsed},
            {"overtime", elapsed > config_.time_limit_seconds},
            {"n_events", events_.size()},
            {"data_rows", data_->rows.size()},
            {"models", models}};
  if (report_) j["report"] = {{"r_models", report_->model_ids}, {"reporting", report_->text}};
  else j["report"] = nullptr;
  return j;
}

std::unique_ptr<Session> replay(const std::vector<json>& records, const DatasetLookup& datasets,
                                ModelRepository& repo, bool run_estimations) {
  if (records.empty() || records.front().value("op", "") != "create")
    fail(ErrorCode::MalformedFile, "journal does not start with a create record");
  auto clock = std::make_shared<ManualClock>();
  std::unique_ptr<Session> session;
  try {
    const auto& c = records.front();
    clock->set(c.at("time_ms").get<std::int64_t>());
    const auto ref = c.at("dataset").get<std::string>();
    auto data = datasets(ref);
    if (!data) fail(ErrorCode::UnknownDataset, "unknown dataset " + ref);
    session = std::make_unique<Session>(c.at("session_id").get<std::string>(), c.at("user_id").get<std::string>(),
                                        ref, std::move(data), session_config_from_json(c.at("config")), clock);
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& r = records[i];
      clock->set(r.at("time_ms").get<std::int64_t>());
      const auto op = r.at("op").get<std::string>();
      // Outcome tools and reports read fitted entries, so anything still
      // pending at that point had finished in the original run.
      if (op == "report" || (op == "action" && r.at("phase") == "OI"))
        for (const auto& job : session->pending_jobs()) session->finish(job.model_id, execute(job, repo));
      if (op == "action") {
        session->record_action(parse_phase(r.at("phase").get<std::string>()), r.at("action").get<std::string>(),
                               r.at("payload"));
      } else if (op == "estimate") {
        const auto job = session->begin_estimation(spec::spec_from_json(r.at("spec")),
                                                   r.value("idempotency_key", std::string()));
        if (run_estimations) session->finish(job.model_id, execute(job, repo));
      } else if (op == "report") {
        session->submit_report(r.at("model_ids").get<std::vector<int>>(), r.at("text").get<std::string>());
      } else {
        fail(ErrorCode::MalformedFile, "unknown journal op " + op);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedFile, std::string("journal record: ") + e.what());
  }
  return session;
}

}  // namespace dcmsg::session
