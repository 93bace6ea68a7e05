#include <fstream>
#include <sstream>

#include "analytics/workflow.hpp"
#include "common/csv.hpp"
#include "common/errors.hpp"
#include "common/numeric.hpp"

namespace dcmsg::analytics {
namespace {

std::string line(const std::vector<std::string>& fields) { return csv::join_row(fields) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

AnalysisReport analyze(const std::vector<TelemetryEvent>& rows, const AnalyzeOptions& options) {
  AnalysisReport report;
  auto seqs = build_sequences(rows);
  report.warnings = seqs.warnings;

  report.transitions.push_back(transition_matrix(seqs.sequences, TransitionLevel::Phase));
  try {
    report.transitions.push_back(transition_matrix(seqs.sequences, TransitionLevel::Family));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoTransitions) throw;
    report.warnings.push_back("no transitions between model families");
  }
  report.timelines = time_allocation(seqs.sequences);
  report.patterns = mine_patterns(symbolize(seqs.sequences, options.level), options.min_support, options.max_len);

  try {
    report.groups = classify_improvement(rows, options.rule);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoModels) throw;
    report.warnings.push_back(std::string("no group comparison: ") + e.what());
    return report;
  }
  report.warnings.insert(report.warnings.end(), report.groups.warnings.begin(), report.groups.warnings.end());
  report.comparisons = group_pattern_comparison(seqs.sequences, report.patterns, report.groups);
  report.warnings.insert(report.warnings.end(), report.comparisons.warnings.begin(),
                         report.comparisons.warnings.end());
  return report;
}

std::string transitions_csv(const std::vector<TransitionMatrix>& matrices) {
  std::string out = line({"level", "from", "to", "count", "probability"});
  for (const auto& m : matrices) {
    const std::string level = m.level == TransitionLevel::Phase ? "phase" : "family";
    for (std::size_t r = 0; r < m.labels.size(); ++r)
      for (std::size_t c = 0; c < m.labels.size(); ++c)
        out += line({level, m.labels[r], m.labels[c], std::to_string(m.counts[r][c]),
                     format_double(m.probabilities[r][c])});
  }
  return out;
}

std::string timelines_csv(const std::vector<TimeAllocation>& timelines) {
  std::string out = line({"user_id", "segment", "phase", "start_seconds", "end_seconds"});
  for (const auto& t : timelines)
    for (std::size_t i = 0; i < t.timeline.size(); ++i) {
      const auto& s = t.timeline[i];
      out += line({t.user_id, std::to_string(i + 1), std::string(session::phase_name(s.phase)),
                   format_double(s.start_seconds), format_double(s.end_seconds)});
    }
  return out;
}

std::string patterns_csv(const std::vector<SequentialPattern>& patterns) {
  std::string out = line({"pattern", "length", "support", "users", "occurrences"});
  for (const auto& p : patterns) {
    std::size_t total = 0;
    for (const auto& [user, n] : p.per_user_count) total += n;
    out += line({p.label(), std::to_string(p.items.size()), format_double(p.support),
                 std::to_string(p.per_user_count.size()), std::to_string(total)});
  }
  return out;
}

std::string comparisons_csv(const ComparisonSet& comparisons, double alpha) {
  std::string out = line({"label", "t_statistic", "p_value"});
  for (const auto& r : comparisons.rows)
    if (r.test.p < alpha) out += line({r.label, format_double(r.test.t), format_double(r.test.p)});
  return out;
}

std::vector<TelemetryEvent> load_export(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (path.extension() == ".jsonl" || path.extension() == ".json")
    return session::parse_telemetry_jsonl(text.str());
  return session::parse_telemetry_csv(text.str());
}

void write_report(const AnalysisReport& report, const std::filesystem::path& out_dir, double alpha) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "transitions.csv", transitions_csv(report.transitions));
  write_file(out_dir / "timelines.csv", timelines_csv(report.timelines));
  write_file(out_dir / "patterns.csv", patterns_csv(report.patterns));
  write_file(out_dir / "comparisons.csv", comparisons_csv(report.comparisons, alpha));
}

}  // namespace dcmsg::analytics
