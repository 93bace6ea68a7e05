#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "estimation/estimator.hpp"
#include "spec/model_spec.hpp"

namespace dcmsg::session {

using ResultPtr = std::shared_ptr<const est::EstimationResult>;

enum class ModelStatus { Pending, Estimated, Misspecified };

std::string_view model_status_name(ModelStatus s);  // "pending", "estimated", "misspecified"

struct ModelEntry {
  int model_id = 0;
  spec::ModelSpecification spec;  // as submitted
  ModelStatus status = ModelStatus::Pending;
  bool cached = false;
  ResultPtr result;     // null while pending or when the data could not be fitted
  std::string message;  // reason for a misspecified entry
};

// Equality used for replay checks: everything but cache provenance and
// measured wall time.
bool same_outcome(const ModelEntry& a, const ModelEntry& b);

// Short listing (no estimates).
nlohmann::json entry_brief(const ModelEntry& e);

// Results table plus fit metrics of an entry.
nlohmann::json entry_view(const ModelEntry& e);

}  // namespace dcmsg::session
