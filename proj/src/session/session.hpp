#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataset/dataset.hpp"
#include "estimation/estimator.hpp"
#include "session/actions.hpp"
#include "session/clock.hpp"
#include "session/journal.hpp"
#include "session/registry.hpp"
#include "session/repository.hpp"
#include "session/telemetry.hpp"

namespace dcmsg::session {

struct SessionConfig {
  double time_limit_seconds = 2700.0;  // soft: later actions are flagged overtime
  est::EstimationOptions estimation;
};

nlohmann::json to_json(const SessionConfig& c);
SessionConfig session_config_from_json(const nlohmann::json& j);

struct Report {
  std::vector<int> model_ids;
  std::string text;
};

// Everything a worker needs to fit one registry entry.
struct EstimationJob {
  int model_id = 0;
  spec::ModelSpecification spec;
  std::shared_ptr<const dataset::ChoiceDataset> data;
  est::EstimationOptions options;
  std::string key;
};

struct JobOutcome {
  ResultPtr result;
  bool cached = false;
  std::string message;  // set when the data could not be fitted at all
};

// Runs a job through the repository. Estimation faults (incomplete data,
// non-positive values under a log, ...) become an outcome without a result.
JobOutcome execute(const EstimationJob& job, ModelRepository& repo);

// One participant's game. Not synchronized: callers serialize access.
class Session {
 public:
  Session(std::string session_id, std::string user_id, std::string dataset_ref,
          std::shared_ptr<const dataset::ChoiceDataset> data, SessionConfig config,
          std::shared_ptr<Clock> clock);

  const std::string& id() const { return id_; }
  const std::string& user_id() const { return user_id_; }
  const std::string& dataset_ref() const { return dataset_ref_; }
  const SessionConfig& config() const { return config_; }
  Phase phase() const { return phase_; }
  std::int64_t init_time_ms() const { return init_time_; }
  std::optional<std::int64_t> end_time_ms() const { return end_time_; }
  bool closed() const { return report_.has_value(); }
  const std::optional<Report>& report() const { return report_; }
  const std::vector<TelemetryEvent>& events() const { return events_; }
  const std::vector<ModelEntry>& models() const { return models_; }
  const dataset::ChoiceDataset& data() const { return *data_; }

  const ModelEntry& model(int model_id) const;  // throws UnknownModelId

  // The create record a journal starts with.
  nlohmann::json create_record() const;
  // Later commands are appended to the journal as they succeed.
  void attach_journal(std::shared_ptr<Journal> journal) { journal_ = std::move(journal); }
  void set_clock(std::shared_ptr<Clock> clock) { clock_ = std::move(clock); }

  // DA and OI tools return their payload; MS devices take the form state
  // (partial spec JSON) and echo the recorded encoding.
  nlohmann::json record_action(Phase phase, std::string_view action, const nlohmann::json& payload);

  // Validates the spec (InvalidSpecError on violations), registers a pending
  // entry and logs the request. The caller runs the job and calls finish.
  EstimationJob begin_estimation(const spec::ModelSpecification& spec, const std::string& idempotency_key = {});
  std::optional<int> model_for_key(const std::string& idempotency_key) const;
  void finish(int model_id, const JobOutcome& outcome);
  std::vector<EstimationJob> pending_jobs() const;

  void submit_report(std::vector<int> model_ids, std::string text);

  // Log joined with the current registry state.
  std::vector<TelemetryEvent> telemetry() const;

  nlohmann::json summary() const;

 private:
  TelemetryEvent& log_event(Phase phase, std::string action, int task_id);
  void journal(nlohmann::json record) const;
  void require_open() const;

  std::string id_;
  std::string user_id_;
  std::string dataset_ref_;
  std::shared_ptr<const dataset::ChoiceDataset> data_;
  SessionConfig config_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<Journal> journal_;
  Phase phase_ = Phase::DA;
  std::int64_t init_time_ = 0;
  std::optional<std::int64_t> end_time_;
  std::vector<TelemetryEvent> events_;
  std::vector<ModelEntry> models_;
  std::map<int, EstimationJob> pending_;
  std::map<std::string, int> idempotency_;
  std::optional<Report> report_;
};

using DatasetLookup = std::function<std::shared_ptr<const dataset::ChoiceDataset>(const std::string&)>;

// Rebuilds a session from journal records. With run_estimations, every
// request is fitted synchronously through repo; otherwise the entries stay
// pending (see Session::pending_jobs).
std::unique_ptr<Session> replay(const std::vector<nlohmann::json>& records, const DatasetLookup& datasets,
                                ModelRepository& repo, bool run_estimations = true);

}  // namespace dcmsg::session
