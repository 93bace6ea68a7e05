#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dcmsg::session {

enum class Phase { DA, MS, OI, R };

std::string_view phase_name(Phase p);  // "DA"
Phase parse_phase(std::string_view name);

struct ActionDef {
  std::string name;   // wire name, e.g. "histogram"
  Phase phase = Phase::DA;
  int task_id = 0;    // DA/OI tool code, 0 for MS devices and reporting
  std::string label;  // display label
};

// 15 DA tools (task ids 1-15), 34 MS devices plus the estimate request,
// 18 OI tools (task ids 16-33) and the report submission.
const std::vector<ActionDef>& action_catalog();

// Throws UnknownAction.
const ActionDef& find_action(std::string_view name);
const ActionDef& find_action(Phase phase, std::string_view name);
const ActionDef* action_by_task(int task_id);

inline constexpr std::string_view kEstimateAction = "estimate";
inline constexpr std::string_view kReportAction = "submit_report";

}  // namespace dcmsg::session
