#include "estimation/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/errors.hpp"

namespace dcmsg::est {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr double kNoise = 1e-10;
constexpr int kMaxBacktracks = 60;

struct Box {
  VectorXd lo, hi;

  Box(const OptimizerOptions& o, Eigen::Index n)
      : lo(VectorXd::Constant(n, -std::numeric_limits<double>::infinity())),
        hi(VectorXd::Constant(n, std::numeric_limits<double>::infinity())) {
    if (!o.lower.empty()) lo = Eigen::Map<const VectorXd>(o.lower.data(), n);
    if (!o.upper.empty()) hi = Eigen::Map<const VectorXd>(o.upper.data(), n);
  }

  VectorXd project(const VectorXd& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

  // Ascent gradient with components that push against an active bound removed.
  VectorXd projected(const VectorXd& x, const VectorXd& g) const {
    VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((x[i] <= lo[i] && g[i] < 0) || (x[i] >= hi[i] && g[i] > 0)) pg[i] = 0.0;
    }
    return pg;
  }
};

}  // namespace

OptimizerResult maximize(const Objective& f, VectorXd x0, const OptimizerOptions& opts) {
  const Eigen::Index n = x0.size();
  const Box box(opts, n);
  OptimizerResult res;
  auto& diag = res.diagnostics;

  VectorXd x = box.project(x0);
  VectorXd g(n);
  double fx = f(x, &g);
  ++diag.evaluations;
  if (!std::isfinite(fx) || !g.allFinite())
    fail(ErrorCode::NonFiniteObjective, "objective is not finite at the starting point");

  MatrixXd H = MatrixXd::Identity(n, n);  // inverse Hessian of -f
  bool scaled = false;
  VectorXd pg = box.projected(x, g);

  for (diag.iterations = 0; diag.iterations < opts.max_iterations; ++diag.iterations) {
    if (pg.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      diag.converged = true;
      break;
    }
    VectorXd d = H * g;  // ascent direction
    for (Eigen::Index i = 0; i < n; ++i)
      if ((x[i] <= box.lo[i] && d[i] < 0) || (x[i] >= box.hi[i] && d[i] > 0)) d[i] = 0.0;
    double slope = g.dot(d);
    if (!(slope > 0.0)) {
      H.setIdentity();
      scaled = false;
      d = pg;
      slope = g.dot(d);
    }

    double alpha = 1.0;
    if (!scaled) alpha = std::min(1.0, 1.0 / std::max(1e-12, d.lpNorm<Eigen::Infinity>()));

    bool accepted = false;
    VectorXd x_new, g_new(n);
    double f_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = box.project(x + alpha * d);
      f_new = f(x_new, &g_new);
      ++diag.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite()) {
        const double step_slope = g.dot(x_new - x);
        const bool armijo = f_new >= fx + kArmijo * step_slope;
        const bool approx_wolfe = f_new >= fx - kNoise * std::abs(fx) &&
                                  std::abs(g_new.dot(d)) <= kCurvature * std::abs(slope);
        if (armijo || approx_wolfe) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (scaled) {  // retry once from a fresh metric
        H.setIdentity();
        scaled = false;
        continue;
      }
      diag.line_search_failed = true;
      diag.message = "line search failed to find an acceptable step";
      break;
    }

    const VectorXd s = x_new - x;
    const VectorXd y = g - g_new;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const VectorXd Hy = H * y;
      H += rho * rho * (sy + y.dot(Hy)) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    x = x_new;
    fx = f_new;
    g = g_new;
    pg = box.projected(x, g);
  }

  if (!diag.converged && !diag.line_search_failed && diag.iterations >= opts.max_iterations)
    diag.message = "iteration limit reached";
  if (!diag.converged && pg.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) diag.converged = true;
  if (diag.converged) diag.message = "gradient tolerance reached";

  res.x = x;
  diag.value = fx;
  diag.gradient_norm = pg.lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace dcmsg::est
