#include "session/manager.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <random>

#include "common/errors.hpp"

namespace dcmsg::session {

SessionManager::SessionManager(ManagerOptions options, std::shared_ptr<ModelRepository> repository)
    : options_(std::move(options)), repository_(std::move(repository)), pool_(options_.workers) {
  if (!options_.clock) options_.clock = std::make_shared<SystemClock>();
  if (!repository_) repository_ = std::make_shared<ModelRepository>();
  if (options_.journal_dir) std::filesystem::create_directories(*options_.journal_dir);
}

SessionManager::~SessionManager() { pool_.wait_idle(); }

void SessionManager::add_dataset(const std::string& name, std::shared_ptr<const dataset::ChoiceDataset> data) {
  std::unique_lock lock(mutex_);
  datasets_[name] = std::move(data);
}

std::shared_ptr<const dataset::ChoiceDataset> SessionManager::dataset(const std::string& name) const {
  std::shared_lock lock(mutex_);
  const auto it = datasets_.find(name);
  return it == datasets_.end() ? nullptr : it->second;
}

std::shared_ptr<SessionManager::Slot> SessionManager::slot(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorCode::UnknownSession, "no session " + session_id);
  return it->second;
}

std::string SessionManager::new_session_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  for (;;) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
    std::string id(buf);
    if (sessions_.count(id)) continue;
    if (options_.journal_dir && std::filesystem::exists(*options_.journal_dir / (id + ".jsonl"))) continue;
    return id;
  }
}

std::string SessionManager::create_session(const std::string& user_id, const std::string& dataset_ref) {
  if (user_id.empty()) fail(ErrorCode::InvalidArgument, "user_id is empty");
  auto data = dataset(dataset_ref);
  if (!data) fail(ErrorCode::UnknownDataset, "unknown dataset " + dataset_ref);

  std::unique_lock lock(mutex_);
  const std::string id = new_session_id();
  auto s = std::make_shared<Slot>();
  s->session = std::make_unique<Session>(id, user_id, dataset_ref, std::move(data), options_.session, options_.clock);
  if (options_.journal_dir) {
    auto journal = std::make_shared<Journal>(*options_.journal_dir / (id + ".jsonl"));
    journal->append(s->session->create_record());
    s->session->attach_journal(std::move(journal));
  }
  sessions_.emplace(id, std::move(s));
  return id;
}

std::vector<std::string> SessionManager::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

nlohmann::json SessionManager::summary(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->session->summary();
}

nlohmann::json SessionManager::record_action(const std::string& session_id, Phase phase, const std::string& action,
                                             const nlohmann::json& payload) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->session->record_action(phase, action, payload);
}

void SessionManager::dispatch(const std::shared_ptr<Slot>& s, const EstimationJob& job,
                              const std::shared_ptr<std::promise<void>>& done) {
  pool_.submit([this, s, job, done] {
    const auto outcome = execute(job, *repository_);
    {
      std::lock_guard lock(s->mutex);
      s->session->finish(job.model_id, outcome);
    }
    if (done) done->set_value();
  });
}

EstimationTicket SessionManager::request_estimation(const std::string& session_id,
                                                    const spec::ModelSpecification& spec,
                                                    const std::string& idempotency_key) {
  auto s = slot(session_id);
  auto ticket = [&s](int model_id) {
    const auto& e = s->session->model(model_id);
    return EstimationTicket{model_id, e.status, e.cached};
  };

  std::unique_lock lock(s->mutex);
  if (!idempotency_key.empty())
    if (const auto id = s->session->model_for_key(idempotency_key)) return ticket(*id);
  const EstimationJob job = s->session->begin_estimation(spec, idempotency_key);
  if (auto hit = repository_->find(job.key)) {
    s->session->finish(job.model_id, {std::move(hit), true, {}});
    return ticket(job.model_id);
  }
  lock.unlock();

  auto done = std::make_shared<std::promise<void>>();
  auto finished = done->get_future();
  dispatch(s, job, done);
  finished.wait_for(options_.pending_threshold);

  lock.lock();
  return ticket(job.model_id);
}

nlohmann::json SessionManager::model_view(const std::string& session_id, int model_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return entry_view(s->session->model(model_id));
}

std::vector<ModelEntry> SessionManager::models(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->session->models();
}

void SessionManager::submit_report(const std::string& session_id, std::vector<int> model_ids, std::string text) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  s->session->submit_report(std::move(model_ids), std::move(text));
}

std::vector<TelemetryEvent> SessionManager::export_telemetry(const std::string& session_id) {
  std::vector<std::shared_ptr<Slot>> slots;
  if (!session_id.empty()) {
    slots.push_back(slot(session_id));
  } else {
    std::shared_lock lock(mutex_);
    for (const auto& [id, s] : sessions_) slots.push_back(s);
  }
  std::vector<TelemetryEvent> events;
  for (const auto& s : slots) {
    std::lock_guard lock(s->mutex);
    auto part = s->session->telemetry();
    events.insert(events.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  sort_for_export(events);
  return events;
}

std::size_t SessionManager::recover() {
  if (!options_.journal_dir) return 0;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(*options_.journal_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  const DatasetLookup lookup = [this](const std::string& name) { return dataset(name); };
  std::size_t restored = 0;
  for (const auto& file : files) {
    const auto records = read_journal(file);
    if (records.empty()) continue;
    auto session = replay(records, lookup, *repository_, false);
    const std::string id = session->id();
    auto s = std::make_shared<Slot>();
    session->set_clock(options_.clock);
    session->attach_journal(std::make_shared<Journal>(file));
    const auto jobs = session->pending_jobs();
    s->session = std::move(session);
    {
      std::unique_lock lock(mutex_);
      if (sessions_.count(id)) continue;
      sessions_.emplace(id, s);
    }
    for (const auto& job : jobs) dispatch(s, job, nullptr);
    ++restored;
  }
  return restored;
}

}  // namespace dcmsg::session
