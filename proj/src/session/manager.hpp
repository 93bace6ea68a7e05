#pragma once

#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "common/worker_pool.hpp"
#include "session/session.hpp"

namespace dcmsg::session {

struct ManagerOptions {
  SessionConfig session;  // applied to every new session
  unsigned workers = 0;   // estimation pool size, 0 = hardware threads
  std::chrono::milliseconds pending_threshold{2000};
  std::optional<std::filesystem::path> journal_dir;
  std::shared_ptr<Clock> clock;  // system clock when null
};

struct EstimationTicket {
  int model_id = 0;
  ModelStatus status = ModelStatus::Pending;
  bool cached = false;
};

// All live sessions of one process. Calls on one session are serialized;
// distinct sessions proceed concurrently and estimations run on a bounded
// worker pool.
class SessionManager {
 public:
  SessionManager(ManagerOptions options, std::shared_ptr<ModelRepository> repository);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  void add_dataset(const std::string& name, std::shared_ptr<const dataset::ChoiceDataset> data);
  std::shared_ptr<const dataset::ChoiceDataset> dataset(const std::string& name) const;

  // Throws UnknownDataset.
  std::string create_session(const std::string& user_id, const std::string& dataset_ref);
  std::vector<std::string> session_ids() const;

  nlohmann::json summary(const std::string& session_id);
  nlohmann::json record_action(const std::string& session_id, Phase phase, const std::string& action,
                               const nlohmann::json& payload);
  // Waits up to the pending threshold; a request repeated with the same
  // idempotency key returns the original entry.
  EstimationTicket request_estimation(const std::string& session_id, const spec::ModelSpecification& spec,
                                      const std::string& idempotency_key = {});
  nlohmann::json model_view(const std::string& session_id, int model_id);
  std::vector<ModelEntry> models(const std::string& session_id);
  void submit_report(const std::string& session_id, std::vector<int> model_ids, std::string text);

  // One session, or every session when session_id is empty; export order.
  std::vector<TelemetryEvent> export_telemetry(const std::string& session_id = {});

  // Replays every journal in the journal directory, then resumes pending
  // estimations. Returns the number of sessions restored.
  std::size_t recover();

  void wait_idle() { pool_.wait_idle(); }
  ModelRepository& repository() { return *repository_; }

 private:
  struct Slot {
    std::mutex mutex;
    std::unique_ptr<Session> session;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  std::string new_session_id();
  void dispatch(const std::shared_ptr<Slot>& slot, const EstimationJob& job,
                const std::shared_ptr<std::promise<void>>& done);

  ManagerOptions options_;
  std::shared_ptr<ModelRepository> repository_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const dataset::ChoiceDataset>> datasets_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t id_counter_ = 0;
  WorkerPool pool_;  // last: joined before the sessions go away
};

}  // namespace dcmsg::session
