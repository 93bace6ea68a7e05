#include "session/repository.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "common/errors.hpp"
#include "post/post_estimation.hpp"

namespace dcmsg::session {

std::string repository_key(const dataset::ChoiceDataset& data, const spec::ModelSpecification& spec,
                           const est::EstimationOptions& opts) {
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(dataset::fingerprint(data)));
  std::ostringstream key;
  key.precision(17);
  key << fp << '|' << spec::canonical_key(spec) << "|R=" << opts.draws << ";starts=" << opts.n_starts
      << ";seed=" << opts.seed << ";tol=" << opts.tolerance << ";iter=" << opts.max_iterations
      << ";cov=" << opts.covariance;
  return key.str();
}

ModelRepository::ModelRepository(std::optional<std::filesystem::path> file) : file_(std::move(file)) {
  if (!file_) return;
  if (std::filesystem::exists(*file_)) {
    std::ifstream in(*file_);
    if (!in) fail(ErrorCode::Io, "cannot read " + file_->string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        entries_[j.at("key").get<std::string>()] =
            std::make_shared<const est::EstimationResult>(post::result_from_json(j.at("result")));
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedFile, file_->string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  out_.open(*file_, std::ios::app);
  if (!out_) fail(ErrorCode::Io, "cannot append to " + file_->string());
}

ResultPtr ModelRepository::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

void ModelRepository::insert(const std::string& key, ResultPtr result) {
  std::lock_guard lock(mutex_);
  if (entries_.emplace(key, result).second) append_line(key, *result);
}

std::size_t ModelRepository::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void ModelRepository::append_line(const std::string& key, const est::EstimationResult& result) {
  if (!out_.is_open()) return;
  out_ << nlohmann::json{{"key", key}, {"result", post::result_to_json(result)}}.dump() << '\n';
  out_.flush();
}

std::pair<ResultPtr, bool> ModelRepository::get_or_compute(
    const std::string& key, const std::function<est::EstimationResult()>& compute) {
  std::promise<ResultPtr> promise;
  {
    std::unique_lock lock(mutex_);
    if (const auto it = entries_.find(key); it != entries_.end()) return {it->second, true};
    if (const auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto future = it->second;
      lock.unlock();
      return {future.get(), true};
    }
    in_flight_.emplace(key, promise.get_future().share());
  }
  try {
    auto result = std::make_shared<const est::EstimationResult>(compute());
    std::lock_guard lock(mutex_);
    entries_.emplace(key, result);
    append_line(key, *result);
    in_flight_.erase(key);
    promise.set_value(result);
    return {result, false};
  } catch (...) {
    std::lock_guard lock(mutex_);
    in_flight_.erase(key);
    promise.set_exception(std::current_exception());
    throw;
  }
}

}  // namespace dcmsg::session
