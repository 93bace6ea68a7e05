#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "estimation/estimator.hpp"

namespace dcmsg::post {

struct FitMetrics {
  std::size_t n_params = 0;
  std::size_t sample_size = 0;  // choice observations
  std::size_t n_individuals = 0;
  double ll_null = 0.0;
  double ll_init = 0.0;
  double ll_final = 0.0;
  double lr_test_null = 0.0;
  double rho2 = 0.0;
  double adj_rho2 = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double gradient_norm = 0.0;
  double est_time = 0.0;
};

FitMetrics fit_metrics(double ll_null, double ll_final, std::size_t n_params, std::size_t sample_size);
FitMetrics fit_metrics(const est::EstimationResult& res);

struct WtpEntry {
  std::string attribute;
  int latent_class = 0;  // 1-based for latent class models, 0 otherwise
  double wtp = 0.0;      // euros per unit increase of the attribute
  double se = 0.0;
  double t_stat = 0.0;
  bool defined = true;
};

// -beta_a / beta_c with its Delta-method standard error.
WtpEntry delta_method_wtp(double beta_attr, double beta_cost, double var_attr, double var_cost,
                          double cov);

// Throws NoCostCoefficient when the model has no generic cost coefficient and
// UnknownVariable when the attribute has no generic coefficient.
WtpEntry wtp(const est::EstimationResult& res, spec::Attribute attribute, int latent_class = 0);

// Every non-cost attribute (and class) with a generic coefficient.
std::vector<WtpEntry> wtp_all(const est::EstimationResult& res);

struct ComparedModel {
  std::string id;
  const est::EstimationResult* result = nullptr;
};

struct MetricRow {
  std::string metric;
  std::vector<double> values;
  std::vector<double> differences;  // value minus the first model's value
  std::vector<std::size_t> best;     // all models within 1e-6 of the best value
  bool tie = false;
};

struct ComparisonTable {
  std::vector<std::string> model_ids;
  std::vector<std::string> parameters;
  // [parameter][model]; empty where the model lacks the parameter
  std::vector<std::vector<std::optional<double>>> estimates;
  std::vector<std::vector<std::optional<double>>> robust_se;
  std::vector<MetricRow> metrics;
};

ComparisonTable compare_models(const std::vector<ComparedModel>& models);

struct ElbowSeries {
  std::string metric;
  std::vector<int> n_class;
  std::vector<double> values;
};

// Best-ll latent class result per class count, one series per metric.
std::vector<ElbowSeries> elbow_data(const std::vector<const est::EstimationResult*>& results);

// JSON views. Non-finite numbers are written as null.
nlohmann::json to_json(const FitMetrics& m);
nlohmann::json to_json(const WtpEntry& w);
nlohmann::json to_json(const ComparisonTable& t);
nlohmann::json to_json(const std::vector<ElbowSeries>& series);

// Parameter table plus metrics and status, as shown to players.
nlohmann::json result_summary(const est::EstimationResult& res);

// Lossless form used by the model repository.
nlohmann::json result_to_json(const est::EstimationResult& res);
est::EstimationResult result_from_json(const nlohmann::json& j);

}  // namespace dcmsg::post
