#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset/dataset.hpp"
#include "spec/model_spec.hpp"

namespace dcmsg::est {

enum class EstimationStatus { Ok, NotConverged, SingularHessian, BoundaryClassShare };

const char* status_name(EstimationStatus s);
inline bool is_misspecified(EstimationStatus s) { return s != EstimationStatus::Ok; }

struct EstimationOptions {
  std::size_t draws = 250;  // mixed logit draws per individual
  int n_starts = 5;         // latent class random starts
  std::uint64_t seed = 1;
  unsigned threads = 0;     // 0 = all hardware threads
  double tolerance = 1e-6;
  int max_iterations = 500;
  bool covariance = true;
};

struct EstimationResult {
  std::string spec_key;
  spec::ModelSpecification spec;
  std::vector<std::string> param_names;
  Eigen::VectorXd estimates;
  Eigen::VectorXd robust_se;
  Eigen::VectorXd classical_se;
  Eigen::VectorXd t_stat;
  Eigen::VectorXd p_value;
  double ll_null = 0.0;
  double ll_init = 0.0;
  double ll_final = 0.0;
  double gradient_norm = 0.0;
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd robust_covariance;
  std::size_t n_obs = 0;
  std::size_t n_individuals = 0;
  std::size_t n_params = 0;
  std::size_t draws_used = 0;
  std::size_t n_starts = 1;
  std::vector<double> start_ll;      // final ll of every start
  std::vector<double> class_shares;  // latent class: mean prior membership
  bool converged = false;
  int iterations = 0;
  EstimationStatus status = EstimationStatus::Ok;
  std::string message;
  unsigned n_cores = 1;
  double wall_time = 0.0;

  std::size_t index_of(const std::string& name) const;  // n_params when absent
};

EstimationResult estimate_mnl(const spec::ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                              const EstimationOptions& opts = {});
EstimationResult estimate_mmnl(const spec::ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                               const EstimationOptions& opts = {});
EstimationResult estimate_lc(const spec::ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                             const EstimationOptions& opts = {});

// Dispatches on the model family.
EstimationResult estimate(const spec::ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                          const EstimationOptions& opts = {});

// Equal-shares log-likelihood of `rows` three-alternative tasks.
double null_loglik(std::size_t rows);

}  // namespace dcmsg::est
