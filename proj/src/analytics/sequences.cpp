#include <algorithm>
#include <tuple>

#include "analytics/workflow.hpp"
#include "common/errors.hpp"

namespace dcmsg::analytics {
namespace {

std::size_t phase_index(Phase p) { return static_cast<std::size_t>(p); }

const std::vector<std::string>& family_labels() {
  static const std::vector<std::string> labels = {"MNL", "LC2", "LC3", "MMNL", "Miss"};
  return labels;
}

bool earlier(const TelemetryEvent& a, const TelemetryEvent& b) {
  return std::tie(a.timestamp_ms, a.session_id, a.seq) < std::tie(b.timestamp_ms, b.session_id, b.seq);
}

}  // namespace

std::string family_label(const TelemetryEvent& e) {
  if (e.status == "misspecified") return "Miss";
  switch (e.spec[0]) {
    case 1: return "MNL";
    case 2: return "MMNL";
    case 3: return "LC" + std::to_string(e.spec[32]);
    default: return "";
  }
}

SequenceSet build_sequences(std::vector<TelemetryEvent> rows) {
  std::map<std::string, std::vector<TelemetryEvent>> by_user;
  for (auto& r : rows) by_user[r.user_id].push_back(std::move(r));

  SequenceSet out;
  for (auto& [user, events] : by_user) {
    if (!std::is_sorted(events.begin(), events.end(), earlier)) {
      out.warnings.push_back("rows of user " + user + " were out of time order and have been re-sorted");
      std::stable_sort(events.begin(), events.end(), earlier);
    }
    WorkflowSequence seq;
    seq.user_id = user;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      WorkflowItem item;
      item.timestamp_ms = e.timestamp_ms;
      item.phase = e.phase;
      item.action = e.action;
      item.task_id = e.task_id;
      if (e.action == session::kEstimateAction) item.family = family_label(e);
      if (i + 1 < events.size())
        item.dwell_seconds = static_cast<double>(events[i + 1].timestamp_ms - e.timestamp_ms) / 1000.0;
      seq.items.push_back(std::move(item));
    }
    out.sequences.push_back(std::move(seq));
  }
  return out;
}

TransitionMatrix transition_matrix(const std::vector<WorkflowSequence>& sequences, TransitionLevel level) {
  TransitionMatrix m;
  m.level = level;
  if (level == TransitionLevel::Phase) {
    for (auto p : {Phase::DA, Phase::MS, Phase::OI, Phase::R}) m.labels.emplace_back(session::phase_name(p));
  } else {
    m.labels = family_labels();
  }
  const std::size_t n = m.labels.size();
  m.counts.assign(n, std::vector<std::size_t>(n, 0));

  auto index_of = [&m](const std::string& label) {
    const auto it = std::find(m.labels.begin(), m.labels.end(), label);
    if (it == m.labels.end()) fail(ErrorCode::SchemaMismatch, "unknown model family " + label);
    return static_cast<std::size_t>(it - m.labels.begin());
  };

  std::size_t total = 0;
  for (const auto& seq : sequences) {
    std::vector<std::size_t> states;
    for (const auto& item : seq.items) {
      if (level == TransitionLevel::Phase) states.push_back(phase_index(item.phase));
      else if (!item.family.empty()) states.push_back(index_of(item.family));
    }
    for (std::size_t i = 1; i < states.size(); ++i) {
      ++m.counts[states[i - 1]][states[i]];
      ++total;
    }
  }
  if (total == 0) fail(ErrorCode::NoTransitions, "the log holds no transitions at this level");

  m.probabilities.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t row_total = 0;
    for (auto c : m.counts[r]) row_total += c;
    if (row_total == 0) continue;
    for (std::size_t c = 0; c < n; ++c)
      m.probabilities[r][c] = static_cast<double>(m.counts[r][c]) / static_cast<double>(row_total);
  }
  return m;
}

std::vector<TimeAllocation> time_allocation(const std::vector<WorkflowSequence>& sequences) {
  std::vector<TimeAllocation> out;
  for (const auto& seq : sequences) {
    TimeAllocation t;
    t.user_id = seq.user_id;
    if (!seq.items.empty()) {
      const std::int64_t origin = seq.items.front().timestamp_ms;
      for (const auto& item : seq.items) {
        t.seconds[phase_index(item.phase)] += item.dwell_seconds;
        const double at = static_cast<double>(item.timestamp_ms - origin) / 1000.0;
        if (t.timeline.empty() || t.timeline.back().phase != item.phase) {
          if (!t.timeline.empty()) t.timeline.back().end_seconds = at;
          t.timeline.push_back({item.phase, at, at});
        }
      }
      t.timeline.back().end_seconds = static_cast<double>(seq.items.back().timestamp_ms - origin) / 1000.0;
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace dcmsg::analytics
