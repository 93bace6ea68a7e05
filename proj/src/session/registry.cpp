#include "session/registry.hpp"

#include <nlohmann/json.hpp>

#include "post/post_estimation.hpp"

namespace dcmsg::session {

std::string_view model_status_name(ModelStatus s) {
  switch (s) {
    case ModelStatus::Pending: return "pending";
    case ModelStatus::Estimated: return "estimated";
    case ModelStatus::Misspecified: return "misspecified";
  }
  return "?";
}

bool same_outcome(const ModelEntry& a, const ModelEntry& b) {
  if (a.model_id != b.model_id || !(a.spec == b.spec) || a.status != b.status || a.message != b.message)
    return false;
  if (!a.result || !b.result) return !a.result && !b.result;
  auto ja = post::result_to_json(*a.result);
  auto jb = post::result_to_json(*b.result);
  ja.erase("wall_time");
  jb.erase("wall_time");
  return ja == jb;
}

nlohmann::json entry_brief(const ModelEntry& e) {
  nlohmann::json j = {{"model_id", e.model_id},
                      {"status", model_status_name(e.status)},
                      {"cached", e.cached},
                      {"spec", spec::to_json(e.spec)}};
  if (!e.message.empty()) j["message"] = e.message;
  return j;
}

nlohmann::json entry_view(const ModelEntry& e) {
  nlohmann::json j = entry_brief(e);
  if (e.result) j["result"] = post::result_summary(*e.result);
  return j;
}

}  // namespace dcmsg::session
