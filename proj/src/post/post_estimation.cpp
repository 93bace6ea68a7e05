#include "post/post_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "common/errors.hpp"
#include "spec/design_matrix.hpp"

namespace dcmsg::post {

using est::EstimationResult;

namespace {

constexpr double kTieTolerance = 1e-6;

Eigen::Index find_param(const EstimationResult& res, const std::string& name) {
  return static_cast<Eigen::Index>(res.index_of(name));
}

std::string class_suffix(int latent_class) {
  return latent_class > 0 ? "_" + std::to_string(latent_class) : std::string();
}

// Point value and its derivative with respect to the estimated parameter.
struct Point {
  double value, derivative;
};

Point point_value(const EstimationResult& res, spec::Attribute a, Eigen::Index index) {
  const double theta = res.estimates[index];
  if (res.spec.family == spec::Family::MMNL &&
      res.spec.at(a).distribution == spec::Distribution::Lognormal) {
    const double median = spec::lognormal_sign(a) * std::exp(theta);
    return {median, median};
  }
  return {theta, 1.0};
}

}  // namespace

FitMetrics fit_metrics(double ll_null, double ll_final, std::size_t n_params, std::size_t sample_size) {
  FitMetrics m;
  const auto k = static_cast<double>(n_params);
  m.n_params = n_params;
  m.sample_size = sample_size;
  m.ll_null = ll_null;
  m.ll_final = ll_final;
  m.lr_test_null = 2.0 * (ll_final - ll_null);
  m.rho2 = 1.0 - ll_final / ll_null;
  m.adj_rho2 = 1.0 - (ll_final - k) / ll_null;
  m.aic = -2.0 * ll_final + 2.0 * k;
  m.bic = -2.0 * ll_final + k * std::log(static_cast<double>(sample_size));
  return m;
}

FitMetrics fit_metrics(const EstimationResult& res) {
  FitMetrics m = fit_metrics(res.ll_null, res.ll_final, res.n_params, res.n_obs);
  m.n_individuals = res.n_individuals;
  m.ll_init = res.ll_init;
  m.gradient_norm = res.gradient_norm;
  m.est_time = res.wall_time;
  return m;
}

WtpEntry delta_method_wtp(double beta_attr, double beta_cost, double var_attr, double var_cost,
                          double cov) {
  WtpEntry w;
  if (beta_cost == 0.0) {
    w.defined = false;
    w.wtp = w.se = w.t_stat = std::numeric_limits<double>::quiet_NaN();
    return w;
  }
  w.wtp = -beta_attr / beta_cost;
  const double ga = -1.0 / beta_cost;
  const double gc = beta_attr / (beta_cost * beta_cost);
  const double var = ga * ga * var_attr + gc * gc * var_cost + 2.0 * ga * gc * cov;
  w.se = std::sqrt(std::max(0.0, var));
  w.t_stat = w.wtp / w.se;
  return w;
}

WtpEntry wtp(const EstimationResult& res, spec::Attribute attribute, int latent_class) {
  const std::string suffix = class_suffix(latent_class);
  const Eigen::Index cost = find_param(res, "b_cost" + suffix);
  if (cost >= static_cast<Eigen::Index>(res.n_params))
    fail(ErrorCode::NoCostCoefficient, "the model has no generic cost coefficient");
  const std::string name = "b_" + std::string(dataset::attribute_key(attribute)) + suffix;
  const Eigen::Index attr = find_param(res, name);
  if (attr >= static_cast<Eigen::Index>(res.n_params) || attribute == spec::Attribute::Cost)
    fail(ErrorCode::UnknownVariable, "no generic coefficient " + name);

  const Point a = point_value(res, attribute, attr);
  const Point c = point_value(res, spec::Attribute::Cost, cost);
  const auto& v = res.robust_covariance;
  WtpEntry w = delta_method_wtp(a.value, c.value, a.derivative * a.derivative * v(attr, attr),
                                c.derivative * c.derivative * v(cost, cost),
                                a.derivative * c.derivative * v(attr, cost));
  w.attribute = std::string(dataset::attribute_name(attribute));
  w.latent_class = latent_class;
  if (res.spec.family == spec::Family::MMNL &&
      res.spec.at(spec::Attribute::Cost).distribution == spec::Distribution::Normal)
    w.defined = false;  // the ratio has no finite moments
  return w;
}

std::vector<WtpEntry> wtp_all(const EstimationResult& res) {
  std::vector<WtpEntry> out;
  const int classes = res.spec.family == spec::Family::LC ? res.spec.n_class : 0;
  for (int c = classes ? 1 : 0; c <= classes; ++c) {
    if (res.index_of("b_cost" + class_suffix(c)) >= res.n_params)
      fail(ErrorCode::NoCostCoefficient, "the model has no generic cost coefficient");
    for (std::size_t k = 0; k < dataset::kNumAttributes; ++k) {
      const auto a = static_cast<spec::Attribute>(k);
      if (a == spec::Attribute::Cost) continue;
      if (res.index_of("b_" + std::string(dataset::attribute_key(a)) + class_suffix(c)) >= res.n_params)
        continue;
      out.push_back(wtp(res, a, c));
    }
  }
  return out;
}

ComparisonTable compare_models(const std::vector<ComparedModel>& models) {
  if (models.size() < 2) fail(ErrorCode::TooFewModels, "comparison needs at least two models");
  ComparisonTable t;
  for (const auto& m : models) {
    if (!m.result) fail(ErrorCode::InvalidArgument, "missing result for model " + m.id);
    t.model_ids.push_back(m.id);
    for (const auto& p : m.result->param_names)
      if (std::find(t.parameters.begin(), t.parameters.end(), p) == t.parameters.end())
        t.parameters.push_back(p);
  }
  for (const auto& p : t.parameters) {
    auto& est_row = t.estimates.emplace_back();
    auto& se_row = t.robust_se.emplace_back();
    for (const auto& m : models) {
      const std::size_t i = m.result->index_of(p);
      if (i < m.result->n_params) {
        est_row.emplace_back(m.result->estimates[static_cast<Eigen::Index>(i)]);
        se_row.emplace_back(m.result->robust_se[static_cast<Eigen::Index>(i)]);
      } else {
        est_row.emplace_back();
        se_row.emplace_back();
      }
    }
  }

  struct Spec {
    const char* name;
    double (*get)(const FitMetrics&);
    int direction;  // +1 larger is better, -1 smaller, 0 informational
  };
  static const Spec kMetrics[] = {
      {"ll_final", [](const FitMetrics& m) { return m.ll_final; }, 1},
      {"rho2", [](const FitMetrics& m) { return m.rho2; }, 1},
      {"adj_rho2", [](const FitMetrics& m) { return m.adj_rho2; }, 1},
      {"aic", [](const FitMetrics& m) { return m.aic; }, -1},
      {"bic", [](const FitMetrics& m) { return m.bic; }, -1},
      {"n_params", [](const FitMetrics& m) { return static_cast<double>(m.n_params); }, 0},
      {"lr_test_null", [](const FitMetrics& m) { return m.lr_test_null; }, 0},
  };
  std::vector<FitMetrics> fits;
  for (const auto& m : models) fits.push_back(fit_metrics(*m.result));
  for (const auto& spec : kMetrics) {
    MetricRow row;
    row.metric = spec.name;
    for (const auto& f : fits) row.values.push_back(spec.get(f));
    for (double v : row.values) row.differences.push_back(v - row.values.front());
    if (spec.direction != 0) {
      double best = row.values.front();
      for (double v : row.values) best = spec.direction > 0 ? std::max(best, v) : std::min(best, v);
      for (std::size_t i = 0; i < row.values.size(); ++i)
        if (std::abs(row.values[i] - best) <= kTieTolerance) row.best.push_back(i);
      row.tie = row.best.size() > 1;
    }
    t.metrics.push_back(std::move(row));
  }
  return t;
}

std::vector<ElbowSeries> elbow_data(const std::vector<const EstimationResult*>& results) {
  std::map<int, const EstimationResult*> best;
  for (const auto* r : results) {
    if (!r || r->spec.family != spec::Family::LC) continue;
    auto& slot = best[r->spec.n_class];
    if (!slot || r->ll_final > slot->ll_final) slot = r;
  }
  if (best.empty()) fail(ErrorCode::NoLatentClassModels, "no latent class models to plot");

  std::vector<ElbowSeries> out;
  for (const char* metric : {"ll_final", "aic", "bic", "rho2", "adj_rho2"}) {
    ElbowSeries s;
    s.metric = metric;
    for (const auto& [classes, r] : best) {
      const FitMetrics m = fit_metrics(*r);
      const std::string name = metric;
      s.n_class.push_back(classes);
      s.values.push_back(name == "ll_final" ? m.ll_final
                         : name == "aic"    ? m.aic
                         : name == "bic"    ? m.bic
                         : name == "rho2"   ? m.rho2
                                            : m.adj_rho2);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dcmsg::post
