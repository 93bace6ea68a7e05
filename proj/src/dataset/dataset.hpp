#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dcmsg::dataset {

inline constexpr std::size_t kNumAttributes = 6;
inline constexpr std::size_t kNumAlternatives = 3;
inline constexpr std::size_t kNumCovariates = 6;

// Order matches the data dictionary (and att_1..att_6 in model specs).
enum class Attribute { Stores, Transport, City, Noise, Green, Cost };

// Order matches the data dictionary, not the interaction codes of a spec.
enum class Covariate { Age, Woman, Homeowner, Carowner, Respcity, Job };

enum class VariableKind { Attribute, Covariate, Id, Choice };

struct AttributeDef {
  std::string name;
  std::string description;
  VariableKind kind = VariableKind::Id;
  std::vector<std::string> levels;
  std::vector<double> numeric_codes;
  std::string units;

  bool operator==(const AttributeDef&) const = default;
};

using AttributeGrid = std::array<std::array<double, kNumAttributes>, kNumAlternatives>;
using CovariateValues = std::array<std::optional<double>, kNumCovariates>;

struct ChoiceRow {
  int respondent_id = 0;
  int task_id = 0;
  AttributeGrid attr{};  // attr[alternative][attribute], numeric codes
  int choice = 1;        // 1 = A, 2 = B, 3 = C
  CovariateValues covariates{};

  bool operator==(const ChoiceRow&) const = default;
};

struct ChoiceDataset {
  std::vector<ChoiceRow> rows;
  std::vector<AttributeDef> dictionary;
  std::size_t n_individuals = 0;
  std::size_t n_tasks_per_individual = 0;

  bool operator==(const ChoiceDataset&) const = default;
};

const std::vector<AttributeDef>& default_dictionary();
const AttributeDef& attribute_def(Attribute a);
const AttributeDef& covariate_def(Covariate c);

std::string_view attribute_name(Attribute a);  // "Stores"
std::string_view attribute_key(Attribute a);   // "stores"
std::string_view covariate_name(Covariate c);  // "Age"
std::string_view alternative_label(std::size_t alt);  // "A"
std::string attribute_column(Attribute a, std::size_t alt);  // "stores_A"

// Column names of the wide file layout, in file order.
const std::vector<std::string>& file_columns();

// Recomputes n_individuals / n_tasks_per_individual from rows.
void refresh_counts(ChoiceDataset& ds);

ChoiceDataset make_dataset(std::vector<ChoiceRow> rows);

bool is_complete(const ChoiceDataset& ds);

// 64-bit FNV-1a digest over the row contents.
std::uint64_t fingerprint(const ChoiceDataset& ds);

// ---- file io ----

ChoiceDataset load_dataset(const std::filesystem::path& path);
ChoiceDataset parse_dataset(std::string_view csv_text);
std::string to_csv(const ChoiceDataset& ds);
void save_dataset(const ChoiceDataset& ds, const std::filesystem::path& path);

// ---- descriptive tools ----

std::vector<AttributeDef> data_dictionary(const ChoiceDataset& ds);

// Names accepted by the variable-based tools: every file column plus the
// pooled attribute names ("Cost" = cost_A, cost_B and cost_C stacked).
std::vector<std::string> variable_names();
std::vector<std::optional<double>> column_values(const ChoiceDataset& ds,
                                                 std::string_view variable);

struct Summary {
  std::size_t count = 0;
  std::size_t missing = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
};

Summary describe(std::span<const double> values);

struct VariableSummary {
  std::string variable;
  Summary stats;
};

std::vector<VariableSummary> summary_statistics(
    const ChoiceDataset& ds, std::optional<std::string_view> variable = std::nullopt);

// Fractions for A, B, C.
std::array<double, kNumAlternatives> choice_shares(const ChoiceDataset& ds);

std::vector<std::pair<std::string, std::size_t>> missing_report(const ChoiceDataset& ds);

enum class MissingStrategy { Delete, ReplaceMean, ReplaceMode, ReplaceMedian };

ChoiceDataset handle_missing(const ChoiceDataset& ds, MissingStrategy strategy);

struct CorrelationMatrix {
  std::vector<std::string> variables;
  std::vector<std::vector<double>> r;
};

CorrelationMatrix correlation_matrix(const ChoiceDataset& ds,
                                     const std::vector<std::string>& variables);

// Type-7 (linear interpolation) quantile of already-sorted values.
double quantile_sorted(std::span<const double> sorted, double p);

enum class ChartKind { Histogram, Boxplot, Pie, Bar, Scatter };

struct HistogramData {
  std::string variable;
  std::vector<double> edges;  // bins + 1 edges; last bin closed on the right
  std::vector<std::size_t> counts;
};

struct BoxplotData {
  std::string variable;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::vector<double> outliers;
};

struct CategoryData {
  std::string variable;
  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<std::size_t> counts;
  std::vector<double> fractions;
};

struct ScatterData {
  std::string x_variable, y_variable;
  std::vector<double> x, y;
};

using ChartData = std::variant<HistogramData, BoxplotData, CategoryData, ScatterData>;

ChartData chart_data(const ChoiceDataset& ds, ChartKind chart,
                     const std::vector<std::string>& variables);

HistogramData histogram(std::string variable, std::vector<double> values);
BoxplotData boxplot(std::string variable, std::vector<double> values);

enum class SortOrder { Ascending, Descending };

ChoiceDataset sort_dataset(const ChoiceDataset& ds, std::string_view variable,
                           SortOrder order);

std::vector<ChoiceRow> head(const ChoiceDataset& ds, std::size_t n = 5);

struct ChoiceTaskView {
  int respondent_id = 0;
  int task_id = 0;
  // labels[alternative][attribute], raw level labels from the dictionary
  std::array<std::array<std::string, kNumAttributes>, kNumAlternatives> labels;
  int choice = 0;
  std::string text;
};

ChoiceTaskView choice_task_example(const ChoiceDataset& ds, int respondent_id,
                                   int task_id);

// ---- synthetic data ----

struct LatentClassTruth {
  double share = 0.0;
  std::map<std::string, double> params;  // overrides of true_params
};

struct SyntheticConfig {
  std::size_t n_individuals = 2430;
  std::size_t n_tasks = 4;
  std::map<std::string, double> true_params;
  // Standard deviations of normally distributed taste coefficients, keyed by
  // coefficient name (b_noise -> individual b_noise ~ N(true, sd)).
  std::map<std::string, double> random_sd;
  // Optional mixture of preference classes; empty means a single class.
  std::vector<LatentClassTruth> classes;
  double missing_rate = 0.0;
  std::uint64_t seed = 1;
};

const std::vector<std::string>& synthetic_param_names();

ChoiceDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace dcmsg::dataset
