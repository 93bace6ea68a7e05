#include <algorithm>
#include <cmath>
#include <numeric>

#include "analytics/workflow.hpp"
#include "common/errors.hpp"
#include "common/special.hpp"

namespace dcmsg::analytics {
namespace {

struct Moments {
  double n = 0.0, mean = 0.0, var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.var = ss / (m.n - 1.0);
  return m;
}

}  // namespace

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorCode::DegenerateGroups, "each group needs at least two values");
  const auto ma = moments(a), mb = moments(b);
  if (ma.var == 0.0 && mb.var == 0.0) fail(ErrorCode::DegenerateGroups, "both groups are constant");
  const double sa = ma.var / ma.n, sb = mb.var / mb.n;
  WelchResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (ma.n - 1.0) + sb * sb / (mb.n - 1.0));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

std::string tool_row_label(const std::string& action) {
  return "Total uses: " + session::find_action(action).label;
}

ComparisonSet group_pattern_comparison(const std::vector<WorkflowSequence>& sequences,
                                       const std::vector<SequentialPattern>& patterns,
                                       const ImprovementGroups& groups) {
  std::map<std::string, bool> label_of;
  for (const auto& u : groups.users) label_of[u.user_id] = u.improved;

  ComparisonSet out;
  auto add_row = [&](std::string label, const std::map<std::string, double>& per_user) {
    std::vector<double> improved, not_improved;
    for (const auto& [user, is_improved] : label_of) {
      const auto it = per_user.find(user);
      const double v = it == per_user.end() ? 0.0 : it->second;
      (is_improved ? improved : not_improved).push_back(v);
    }
    if (improved.size() < 2 || not_improved.size() < 2) {
      out.warnings.push_back(label + ": skipped, a group has fewer than two users");
      return;
    }
    GroupComparison row;
    row.label = std::move(label);
    row.n_improved = improved.size();
    row.n_not_improved = not_improved.size();
    row.mean_improved = std::accumulate(improved.begin(), improved.end(), 0.0) / static_cast<double>(improved.size());
    row.mean_not_improved =
        std::accumulate(not_improved.begin(), not_improved.end(), 0.0) / static_cast<double>(not_improved.size());
    try {
      row.test = welch_t_test(not_improved, improved);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateGroups) throw;
      out.warnings.push_back(row.label + ": skipped, " + e.what());
      return;
    }
    out.rows.push_back(std::move(row));
  };

  for (const auto& p : patterns) {
    std::map<std::string, double> per_user;
    for (const auto& [user, n] : p.per_user_count) per_user[user] = static_cast<double>(n);
    add_row(p.label(), per_user);
  }

  std::map<std::string, std::map<std::string, double>> tool_uses;
  for (const auto& a : session::action_catalog())
    if (a.task_id > 0) tool_uses[a.name];
  for (const auto& seq : sequences)
    for (const auto& item : seq.items)
      if (item.task_id > 0 && tool_uses.count(item.action)) tool_uses[item.action][seq.user_id] += 1.0;
  for (const auto& [action, per_user] : tool_uses) add_row(tool_row_label(action), per_user);

  std::sort(out.rows.begin(), out.rows.end(),
            [](const GroupComparison& a, const GroupComparison& b) { return a.label < b.label; });
  return out;
}

}  // namespace dcmsg::analytics
