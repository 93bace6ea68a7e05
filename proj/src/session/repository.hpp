#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "dataset/dataset.hpp"
#include "estimation/estimator.hpp"
#include "session/registry.hpp"

namespace dcmsg::session {

// Cache key: dataset fingerprint, canonical spec and every option that can
// change the estimates.
std::string repository_key(const dataset::ChoiceDataset& data, const spec::ModelSpecification& spec,
                           const est::EstimationOptions& opts);

// Shared store of estimation results. With a backing file, entries are
// loaded on construction and appended as JSON lines on insertion.
class ModelRepository {
 public:
  explicit ModelRepository(std::optional<std::filesystem::path> file = std::nullopt);

  ModelRepository(const ModelRepository&) = delete;
  ModelRepository& operator=(const ModelRepository&) = delete;

  ResultPtr find(const std::string& key) const;
  void insert(const std::string& key, ResultPtr result);
  std::size_t size() const;

  // Returns the stored result (hit = true) or runs compute once; concurrent
  // callers with the same key wait for the same computation. Exceptions from
  // compute reach every waiter and nothing is stored.
  std::pair<ResultPtr, bool> get_or_compute(const std::string& key,
                                            const std::function<est::EstimationResult()>& compute);

 private:
  void append_line(const std::string& key, const est::EstimationResult& result);

  mutable std::mutex mutex_;
  std::map<std::string, ResultPtr> entries_;
  std::map<std::string, std::shared_future<ResultPtr>> in_flight_;
  std::optional<std::filesystem::path> file_;
  std::ofstream out_;
};

}  // namespace dcmsg::session
