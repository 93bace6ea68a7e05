#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcmsg::est {

// Returns f(x); when grad is non-null it receives the gradient. Non-finite
// return values mark x as infeasible.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct OptimizerOptions {
  double gradient_tolerance = 1e-6;  // on the projected gradient, infinity norm
  int max_iterations = 500;
  std::vector<double> lower;  // empty = unbounded
  std::vector<double> upper;
};

struct OptimizerDiagnostics {
  bool converged = false;
  bool line_search_failed = false;
  int iterations = 0;
  int evaluations = 0;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::string message;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  OptimizerDiagnostics diagnostics;
};

// BFGS ascent with a backtracking line search (sufficient increase, with an
// approximate-Wolfe fallback once progress is below rounding noise). Box
// bounds are handled by projection. Throws NonFiniteObjective when f(x0) is
// not finite.
OptimizerResult maximize(const Objective& f, Eigen::VectorXd x0, const OptimizerOptions& opts = {});

}  // namespace dcmsg::est
