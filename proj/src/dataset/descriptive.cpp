#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "common/errors.hpp"
#include "common/numeric.hpp"
#include "dataset/dataset.hpp"

namespace dcmsg::dataset {
namespace {

using Column = std::vector<std::optional<double>>;

std::optional<Attribute> pooled_attribute(std::string_view name) {
  for (std::size_t k = 0; k < kNumAttributes; ++k) {
    const auto a = static_cast<Attribute>(k);
    if (name == attribute_name(a)) return a;
  }
  return std::nullopt;
}

std::vector<double> present_values(const Column& col) {
  std::vector<double> out;
  out.reserve(col.size());
  for (const auto& v : col)
    if (v) out.push_back(*v);
  return out;
}

const AttributeDef* def_for_variable(std::string_view name) {
  if (auto a = pooled_attribute(name)) return &attribute_def(*a);
  for (std::size_t alt = 0; alt < kNumAlternatives; ++alt)
    for (std::size_t k = 0; k < kNumAttributes; ++k)
      if (name == attribute_column(static_cast<Attribute>(k), alt))
        return &attribute_def(static_cast<Attribute>(k));
  for (const auto& def : default_dictionary())
    if (def.name == name) return &def;
  return nullptr;
}

std::string level_label(const AttributeDef* def, double value) {
  if (def) {
    for (std::size_t i = 0; i < def->numeric_codes.size(); ++i)
      if (def->numeric_codes[i] == value) return def->levels[i];
  }
  return format_double(value);
}

double mode_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double best = values.front();
  std::size_t best_run = 0;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    if (j - i > best_run) {
      best_run = j - i;
      best = values[i];
    }
    i = j;
  }
  return best;
}

}  // namespace

std::vector<AttributeDef> data_dictionary(const ChoiceDataset& ds) {
  return ds.dictionary.empty() ? default_dictionary() : ds.dictionary;
}

std::vector<std::string> variable_names() {
  std::vector<std::string> names = file_columns();
  for (std::size_t k = 0; k < kNumAttributes; ++k)
    names.emplace_back(attribute_name(static_cast<Attribute>(k)));
  return names;
}

std::vector<std::optional<double>> column_values(const ChoiceDataset& ds,
                                                 std::string_view variable) {
  Column out;
  if (auto a = pooled_attribute(variable)) {
    const auto k = static_cast<std::size_t>(*a);
    out.reserve(ds.rows.size() * kNumAlternatives);
    for (std::size_t alt = 0; alt < kNumAlternatives; ++alt)
      for (const auto& row : ds.rows) out.emplace_back(row.attr[alt][k]);
    return out;
  }
  const auto& cols = file_columns();
  const auto it = std::find(cols.begin(), cols.end(), variable);
  if (it == cols.end()) fail(ErrorCode::UnknownVariable, "unknown variable: " + std::string(variable));
  const auto idx = static_cast<std::size_t>(it - cols.begin());
  out.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    if (idx == 0) {
      out.emplace_back(row.respondent_id);
    } else if (idx == 1) {
      out.emplace_back(row.task_id);
    } else if (idx < 2 + kNumAlternatives * kNumAttributes) {
      const std::size_t off = idx - 2;
      out.emplace_back(row.attr[off / kNumAttributes][off % kNumAttributes]);
    } else if (idx == 2 + kNumAlternatives * kNumAttributes) {
      out.emplace_back(row.choice);
    } else {
      out.push_back(row.covariates[idx - 3 - kNumAlternatives * kNumAttributes]);
    }
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::EmptyDataset, "quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary describe(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = quantile_sorted(sorted, 0.5);
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [m = s.mean](double x) { return (x - m) * (x - m); });
    s.sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<VariableSummary> summary_statistics(const ChoiceDataset& ds,
                                                std::optional<std::string_view> variable) {
  std::vector<std::string> names;
  if (variable) {
    names.emplace_back(*variable);
  } else {
    names = file_columns();
  }
  std::vector<VariableSummary> out;
  for (const auto& name : names) {
    const auto col = column_values(ds, name);
    const auto present = present_values(col);
    VariableSummary vs{name, describe(present)};
    vs.stats.missing = col.size() - present.size();
    out.push_back(std::move(vs));
  }
  return out;
}

std::array<double, kNumAlternatives> choice_shares(const ChoiceDataset& ds) {
  if (ds.rows.empty()) fail(ErrorCode::EmptyDataset, "no rows");
  std::array<std::size_t, kNumAlternatives> counts{};
  for (const auto& row : ds.rows) ++counts.at(static_cast<std::size_t>(row.choice - 1));
  std::array<double, kNumAlternatives> shares{};
  const auto n = static_cast<double>(ds.rows.size());
  for (std::size_t a = 0; a < kNumAlternatives; ++a)
    shares[a] = static_cast<double>(counts[a]) / n;
  return shares;
}

std::vector<std::pair<std::string, std::size_t>> missing_report(const ChoiceDataset& ds) {
  std::vector<std::pair<std::string, std::size_t>> out;
  const auto& cols = file_columns();
  const std::size_t first_cov = cols.size() - kNumCovariates;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::size_t n = 0;
    if (i >= first_cov) {
      for (const auto& row : ds.rows)
        if (!row.covariates[i - first_cov]) ++n;
    }
    out.emplace_back(cols[i], n);
  }
  return out;
}

ChoiceDataset handle_missing(const ChoiceDataset& ds, MissingStrategy strategy) {
  ChoiceDataset out = ds;
  if (strategy == MissingStrategy::Delete) {
    std::erase_if(out.rows, [](const ChoiceRow& r) {
      return std::any_of(r.covariates.begin(), r.covariates.end(),
                         [](const auto& v) { return !v.has_value(); });
    });
    if (out.rows.empty() && !ds.rows.empty())
      fail(ErrorCode::AllRowsDeleted, "deleting missing values removes every row");
    refresh_counts(out);
    return out;
  }
  for (std::size_t j = 0; j < kNumCovariates; ++j) {
    std::vector<double> present;
    bool any_missing = false;
    for (const auto& row : ds.rows) {
      if (row.covariates[j]) {
        present.push_back(*row.covariates[j]);
      } else {
        any_missing = true;
      }
    }
    if (!any_missing) continue;
    if (present.empty()) {
      fail(ErrorCode::InvalidArgument, "column " +
                                           std::string(covariate_name(static_cast<Covariate>(j))) +
                                           " has no present values to impute from");
    }
    double fill = 0.0;
    switch (strategy) {
      case MissingStrategy::ReplaceMean:
        fill = pairwise_sum(present) / static_cast<double>(present.size());
        break;
      case MissingStrategy::ReplaceMode:
        fill = mode_of(present);
        break;
      case MissingStrategy::ReplaceMedian:
        std::sort(present.begin(), present.end());
        fill = quantile_sorted(present, 0.5);
        break;
      case MissingStrategy::Delete:
        break;
    }
    for (auto& row : out.rows)
      if (!row.covariates[j]) row.covariates[j] = fill;
  }
  return out;
}

CorrelationMatrix correlation_matrix(const ChoiceDataset& ds,
                                     const std::vector<std::string>& variables) {
  std::vector<Column> cols;
  cols.reserve(variables.size());
  for (const auto& v : variables) cols.push_back(column_values(ds, v));

  CorrelationMatrix m;
  m.variables = variables;
  const std::size_t n = variables.size();
  m.r.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (cols[i].size() != cols[j].size())
        fail(ErrorCode::ArityMismatch, "pooled and per-row variables cannot be correlated");
      std::vector<double> x, y;
      for (std::size_t r = 0; r < cols[i].size(); ++r) {
        if (cols[i][r] && cols[j][r]) {
          x.push_back(*cols[i][r]);
          y.push_back(*cols[j][r]);
        }
      }
      if (x.size() < 2)
        fail(ErrorCode::InvalidArgument, "fewer than two complete observations");
      const double mx = pairwise_sum(x) / static_cast<double>(x.size());
      const double my = pairwise_sum(y) / static_cast<double>(y.size());
      std::vector<double> sxy(x.size()), sxx(x.size()), syy(x.size());
      for (std::size_t r = 0; r < x.size(); ++r) {
        sxy[r] = (x[r] - mx) * (y[r] - my);
        sxx[r] = (x[r] - mx) * (x[r] - mx);
        syy[r] = (y[r] - my) * (y[r] - my);
      }
      const double vx = pairwise_sum(sxx), vy = pairwise_sum(syy);
      if (vx == 0.0 || vy == 0.0)
        fail(ErrorCode::ZeroVariance,
             "zero variance in " + (vx == 0.0 ? variables[i] : variables[j]));
      double r = (i == j) ? 1.0 : pairwise_sum(sxy) / std::sqrt(vx * vy);
      r = std::clamp(r, -1.0, 1.0);
      m.r[i][j] = m.r[j][i] = r;
    }
  }
  return m;
}

HistogramData histogram(std::string variable, std::vector<double> values) {
  HistogramData h;
  h.variable = std::move(variable);
  if (values.empty()) return h;
  std::sort(values.begin(), values.end());
  const double lo = values.front(), hi = values.back();
  const double n = static_cast<double>(values.size());
  const double iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
  const double width = 2.0 * iqr / std::cbrt(n);

  std::size_t bins = 5;
  if (hi > lo && width > 0.0) {
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::clamp<std::size_t>(bins, 5, 50);
  }
  const double left = hi > lo ? lo : lo - 0.5;
  const double right = hi > lo ? hi : hi + 0.5;
  const double step = (right - left) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = left + step * static_cast<double>(i);
  h.edges.back() = right;
  h.counts.assign(bins, 0);
  for (double x : values) {
    auto idx = static_cast<std::size_t>(std::floor((x - left) / step));
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

BoxplotData boxplot(std::string variable, std::vector<double> values) {
  BoxplotData b;
  b.variable = std::move(variable);
  if (values.empty()) fail(ErrorCode::EmptyDataset, "no present values for boxplot");
  std::sort(values.begin(), values.end());
  b.min = values.front();
  b.max = values.back();
  b.q1 = quantile_sorted(values, 0.25);
  b.median = quantile_sorted(values, 0.5);
  b.q3 = quantile_sorted(values, 0.75);
  const double fence = 1.5 * (b.q3 - b.q1);
  for (double x : values)
    if (x < b.q1 - fence || x > b.q3 + fence) b.outliers.push_back(x);
  return b;
}

ChartData chart_data(const ChoiceDataset& ds, ChartKind chart,
                     const std::vector<std::string>& variables) {
  const std::size_t arity = chart == ChartKind::Scatter ? 2 : 1;
  if (variables.size() != arity) {
    fail(ErrorCode::ArityMismatch, "chart needs " + std::to_string(arity) + " variable(s), got " +
                                       std::to_string(variables.size()));
  }
  const auto col = column_values(ds, variables[0]);
  switch (chart) {
    case ChartKind::Histogram:
      return histogram(variables[0], present_values(col));
    case ChartKind::Boxplot:
      return boxplot(variables[0], present_values(col));
    case ChartKind::Pie:
    case ChartKind::Bar: {
      std::map<double, std::size_t> counts;
      std::size_t total = 0;
      for (const auto& v : col) {
        if (v) {
          ++counts[*v];
          ++total;
        }
      }
      CategoryData c;
      c.variable = variables[0];
      const AttributeDef* def = def_for_variable(variables[0]);
      for (const auto& [value, count] : counts) {
        c.values.push_back(value);
        c.labels.push_back(level_label(def, value));
        c.counts.push_back(count);
        c.fractions.push_back(static_cast<double>(count) / static_cast<double>(total));
      }
      return c;
    }
    case ChartKind::Scatter: {
      const auto ycol = column_values(ds, variables[1]);
      if (ycol.size() != col.size())
        fail(ErrorCode::ArityMismatch, "scatter variables have different lengths");
      ScatterData s{variables[0], variables[1], {}, {}};
      for (std::size_t i = 0; i < col.size(); ++i) {
        if (col[i] && ycol[i]) {
          s.x.push_back(*col[i]);
          s.y.push_back(*ycol[i]);
        }
      }
      return s;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown chart kind");
}

ChoiceDataset sort_dataset(const ChoiceDataset& ds, std::string_view variable, SortOrder order) {
  if (variable != "ID" && variable != "TaskID" && !def_for_variable(variable))
    fail(ErrorCode::UnknownVariable, "unknown variable: " + std::string(variable));
  if (pooled_attribute(variable))
    fail(ErrorCode::UnknownVariable,
         "sort needs a single column such as " + std::string(variable) + "'s per-alternative column");
  const auto col = column_values(ds, variable);
  std::vector<std::size_t> idx(ds.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    // absent values always last
    if (!col[a] || !col[b]) return col[a].has_value() && !col[b].has_value();
    return order == SortOrder::Ascending ? *col[a] < *col[b] : *col[a] > *col[b];
  });
  ChoiceDataset out;
  out.dictionary = ds.dictionary;
  out.rows.reserve(ds.rows.size());
  for (auto i : idx) out.rows.push_back(ds.rows[i]);
  out.n_individuals = ds.n_individuals;
  out.n_tasks_per_individual = ds.n_tasks_per_individual;
  return out;
}

std::vector<ChoiceRow> head(const ChoiceDataset& ds, std::size_t n) {
  const auto count = std::min(n, ds.rows.size());
  return {ds.rows.begin(), ds.rows.begin() + static_cast<std::ptrdiff_t>(count)};
}

ChoiceTaskView choice_task_example(const ChoiceDataset& ds, int respondent_id, int task_id) {
  const auto it = std::find_if(ds.rows.begin(), ds.rows.end(), [&](const ChoiceRow& r) {
    return r.respondent_id == respondent_id && r.task_id == task_id;
  });
  if (it == ds.rows.end()) {
    fail(ErrorCode::UnknownTask, "no task " + std::to_string(task_id) + " for respondent " +
                                     std::to_string(respondent_id));
  }
  ChoiceTaskView view;
  view.respondent_id = respondent_id;
  view.task_id = task_id;
  view.choice = it->choice;
  std::ostringstream text;
  text << "Respondent " << respondent_id << ", task " << task_id << "\n";
  text << "Attribute";
  for (std::size_t alt = 0; alt < kNumAlternatives; ++alt)
    text << " | Neighbourhood " << alternative_label(alt);
  text << "\n";
  for (std::size_t k = 0; k < kNumAttributes; ++k) {
    const auto& def = attribute_def(static_cast<Attribute>(k));
    text << def.name;
    for (std::size_t alt = 0; alt < kNumAlternatives; ++alt) {
      view.labels[alt][k] = level_label(&def, it->attr[alt][k]);
      text << " | " << view.labels[alt][k];
    }
    text << "\n";
  }
  text << "Chosen: " << alternative_label(static_cast<std::size_t>(it->choice - 1)) << "\n";
  view.text = text.str();
  return view;
}

}  // namespace dcmsg::dataset
