#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dataset/dataset.hpp"
#include "session/registry.hpp"

namespace dcmsg::session {

// Runs a descriptive-analysis tool. Tools that edit the data (missing value
// handling, sorting) replace `data` with a new snapshot; estimations already
// dispatched keep the snapshot they were given.
nlohmann::json run_da_tool(std::string_view tool, const nlohmann::json& payload,
                           std::shared_ptr<const dataset::ChoiceDataset>& data);

// Runs an outcome-interpretation tool over the model registry. Throws
// UnknownModelId for ids that are absent or have no estimates yet.
nlohmann::json run_oi_tool(std::string_view tool, const nlohmann::json& payload,
                           const std::vector<ModelEntry>& models);

}  // namespace dcmsg::session
