#pragma once

#include <Eigen/Dense>

#include "estimation/likelihood.hpp"

namespace dcmsg::est {

// Central differences of the analytic gradient, symmetrized.
Eigen::MatrixXd numerical_hessian(const Likelihood& lik, const Eigen::VectorXd& theta);

// True when the correlation-scaled Hessian has an eigenvalue near zero.
bool is_singular(const Eigen::MatrixXd& hessian);

// True when H is negative definite.
bool is_local_maximum(const Eigen::MatrixXd& hessian);

// (-H)^-1; throws SingularHessian.
Eigen::MatrixXd classical_covariance(const Eigen::MatrixXd& hessian);

// Sandwich estimator H^-1 (sum_n g_n g_n') H^-1 with one score row per
// respondent. Throws SingularHessian.
Eigen::MatrixXd robust_covariance(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& scores);

}  // namespace dcmsg::est
