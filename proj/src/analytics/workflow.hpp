#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "session/telemetry.hpp"

namespace dcmsg::analytics {

using session::Phase;
using session::TelemetryEvent;

inline constexpr std::size_t kNumPhases = 4;

struct WorkflowItem {
  std::int64_t timestamp_ms = 0;
  Phase phase = Phase::DA;
  std::string action;
  int task_id = 0;
  std::string family;  // estimate requests: MNL, MMNL, LC2, LC3 or Miss; empty otherwise
  double dwell_seconds = 0.0;
};

struct WorkflowSequence {
  std::string user_id;
  std::vector<WorkflowItem> items;
};

struct SequenceSet {
  std::vector<WorkflowSequence> sequences;  // sorted by user_id
  std::vector<std::string> warnings;
};

// Family label of an estimate event ("Miss" when misspecified).
std::string family_label(const TelemetryEvent& e);

// One sequence per user; rows out of time order are re-sorted with a warning.
SequenceSet build_sequences(std::vector<TelemetryEvent> rows);

enum class TransitionLevel { Phase, Family };

struct TransitionMatrix {
  TransitionLevel level = TransitionLevel::Phase;
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;
  // Rows without outgoing transitions are all zero; the others sum to 1.
  std::vector<std::vector<double>> probabilities;
};

// Counts consecutive pairs within each user's sequence. Throws NoTransitions.
TransitionMatrix transition_matrix(const std::vector<WorkflowSequence>& sequences, TransitionLevel level);

struct TimelineSegment {
  Phase phase = Phase::DA;
  double start_seconds = 0.0;  // from the user's first event
  double end_seconds = 0.0;
};

struct TimeAllocation {
  std::string user_id;
  std::array<double, kNumPhases> seconds{};  // DA, MS, OI, R
  std::vector<TimelineSegment> timeline;
};

std::vector<TimeAllocation> time_allocation(const std::vector<WorkflowSequence>& sequences);

// ---- improvement grouping ----

enum class ImprovementRule { Bic, Aic, LogLik, Rho2 };

ImprovementRule parse_rule(std::string_view name);  // "bic", "aic", "ll", "rho2"

struct UserImprovement {
  std::string user_id;
  bool improved = false;
  bool reported = false;  // false: inferred from the last specified models
  double first_value = 0.0;
  double final_value = 0.0;
};

struct ImprovementGroups {
  std::vector<UserImprovement> users;  // sorted by user_id
  std::vector<std::string> warnings;   // users without fitted models
};

// Improved iff the final model beats the first successfully estimated one on
// the rule's metric. Final model: the best reported one, or without a report
// the best among the last three fitted models. Throws NoModels.
ImprovementGroups classify_improvement(const std::vector<TelemetryEvent>& rows,
                                       ImprovementRule rule = ImprovementRule::Bic);

// ---- sequential patterns ----

struct SequentialPattern {
  std::vector<std::string> items;
  double support = 0.0;  // fraction of sequences containing the pattern
  std::map<std::string, std::size_t> per_user_count;  // leftmost-greedy embeddings

  std::string label() const;  // "OI -> OI -> DA"
};

struct SymbolSequence {
  std::string user_id;
  std::vector<std::string> symbols;
};

enum class SymbolLevel { Phase, Action };

std::vector<SymbolSequence> symbolize(const std::vector<WorkflowSequence>& sequences, SymbolLevel level);

// All patterns of length 1..max_len whose support reaches min_support, by
// equivalence-class id-list joins. Sorted by length, then items.
std::vector<SequentialPattern> mine_patterns(const std::vector<SymbolSequence>& db, double min_support = 0.7,
                                             std::size_t max_len = 6);

// Non-overlapping embeddings found by repeated leftmost matching.
std::size_t count_occurrences(const std::vector<std::string>& sequence, const std::vector<std::string>& pattern);

// ---- group tests ----

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Throws DegenerateGroups when a group has fewer than two values or both
// are constant.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct GroupComparison {
  std::string label;
  double mean_improved = 0.0;
  double mean_not_improved = 0.0;
  std::size_t n_improved = 0;
  std::size_t n_not_improved = 0;
  WelchResult test;  // welch_t_test(not improved, improved)
};

struct ComparisonSet {
  std::vector<GroupComparison> rows;  // sorted by label
  std::vector<std::string> warnings;
};

// One row per pattern plus one "Total uses: <tool>" row per DA/OI tool.
ComparisonSet group_pattern_comparison(const std::vector<WorkflowSequence>& sequences,
                                       const std::vector<SequentialPattern>& patterns,
                                       const ImprovementGroups& groups);

std::string tool_row_label(const std::string& action);  // "Total uses: View correlation"

// ---- batch analysis ----

struct AnalyzeOptions {
  double min_support = 0.7;
  std::size_t max_len = 6;
  ImprovementRule rule = ImprovementRule::Bic;
  SymbolLevel level = SymbolLevel::Phase;
  double alpha = 0.05;
};

struct AnalysisReport {
  std::vector<TransitionMatrix> transitions;
  std::vector<TimeAllocation> timelines;
  std::vector<SequentialPattern> patterns;
  ImprovementGroups groups;
  ComparisonSet comparisons;
  std::vector<std::string> warnings;
};

AnalysisReport analyze(const std::vector<TelemetryEvent>& rows, const AnalyzeOptions& options = {});

std::string transitions_csv(const std::vector<TransitionMatrix>& matrices);
std::string timelines_csv(const std::vector<TimeAllocation>& timelines);
std::string patterns_csv(const std::vector<SequentialPattern>& patterns);
std::string comparisons_csv(const ComparisonSet& comparisons, double alpha = 0.05);  // significant rows only

// Reads a CSV or JSON-lines export (by extension).
std::vector<TelemetryEvent> load_export(const std::filesystem::path& path);

// Writes transitions.csv, timelines.csv, patterns.csv and comparisons.csv.
void write_report(const AnalysisReport& report, const std::filesystem::path& out_dir, double alpha = 0.05);

// ---- synthetic cohort ----

struct CohortConfig {
  std::size_t improved = 30;
  std::size_t not_improved = 10;
  std::string effect_tool = "correlation";
  double effect_ratio = 3.0;  // mean uses, improved over not improved
  std::uint64_t seed = 1;
};

struct Cohort {
  std::vector<TelemetryEvent> events;
  std::map<std::string, bool> improved;  // planted labels
};

Cohort generate_cohort(const CohortConfig& config);

}  // namespace dcmsg::analytics
