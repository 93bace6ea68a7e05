#include "estimation/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "estimation/covariance.hpp"
#include "estimation/halton.hpp"
#include "estimation/likelihood.hpp"
#include "estimation/optimizer.hpp"
#include "spec/design_matrix.hpp"

namespace dcmsg::est {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using spec::DesignMatrix;
using spec::Family;
using spec::ModelSpecification;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kMinClassShare = 0.01;
constexpr double kStartSpread = 0.5;

unsigned resolve_threads(unsigned requested) {
  return requested ? requested : std::max(1u, std::thread::hardware_concurrency());
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct Fit {
  VectorXd x;
  OptimizerDiagnostics diagnostics;
  double ll_init = 0.0;
};

Fit run(const Likelihood& lik, const VectorXd& x0, const EstimationOptions& opts) {
  const Objective f = [&](const VectorXd& x, VectorXd* grad) {
    try {
      auto r = lik.evaluate(x, grad != nullptr);
      if (grad) *grad = std::move(r.grad);
      return r.ll;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteUtility) throw;
      return -std::numeric_limits<double>::infinity();
    }
  };
  OptimizerOptions o;
  o.gradient_tolerance = opts.tolerance;
  o.max_iterations = opts.max_iterations;
  o.lower = lik.design().lower;
  o.upper = lik.design().upper;

  Fit fit;
  fit.ll_init = f(x0, nullptr);
  auto r = maximize(f, x0, o);
  fit.x = std::move(r.x);
  fit.diagnostics = std::move(r.diagnostics);
  return fit;
}

// Fills everything except the class shares from the chosen optimum.
EstimationResult finish(const ModelSpecification& spec, const Likelihood& lik, const Fit& fit,
                        const EstimationOptions& opts, unsigned threads) {
  const DesignMatrix& dm = lik.design();
  EstimationResult res;
  res.spec_key = dm.spec_key;
  res.spec = spec::normalized(spec);
  res.param_names = dm.param_names;
  res.estimates = fit.x;
  res.ll_null = null_loglik(dm.n_rows());
  res.ll_init = fit.ll_init;
  res.ll_final = fit.diagnostics.value;
  res.gradient_norm = fit.diagnostics.gradient_norm;
  res.n_obs = dm.n_rows();
  res.n_individuals = dm.n_individuals();
  res.n_params = dm.n_params();
  res.converged = fit.diagnostics.converged;
  res.iterations = fit.diagnostics.iterations;
  res.message = fit.diagnostics.message;
  res.n_cores = threads;

  const auto k = static_cast<Eigen::Index>(dm.n_params());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  res.robust_se = res.classical_se = res.t_stat = res.p_value = VectorXd::Constant(k, nan);
  res.robust_covariance = MatrixXd::Constant(k, k, nan);

  if (!res.converged) res.status = EstimationStatus::NotConverged;
  if (!opts.covariance) return res;

  res.hessian = numerical_hessian(lik, fit.x);
  if (is_singular(res.hessian) || !is_local_maximum(res.hessian)) {
    if (res.status == EstimationStatus::Ok) {
      res.status = EstimationStatus::SingularHessian;
      res.message = is_singular(res.hessian) ? "hessian is singular" : "hessian is not negative definite";
    }
    return res;
  }
  res.robust_covariance = robust_covariance(res.hessian, lik.scores(fit.x));
  res.classical_se = classical_covariance(res.hessian).diagonal().cwiseMax(0.0).cwiseSqrt();
  res.robust_se = res.robust_covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < k; ++i) {
    res.t_stat[i] = res.estimates[i] / res.robust_se[i];
    res.p_value[i] = std::erfc(std::abs(res.t_stat[i]) / std::sqrt(2.0));
  }
  return res;
}

ModelSpecification fixed_counterpart(const ModelSpecification& spec) {
  ModelSpecification m = spec;
  m.family = Family::MNL;
  m.n_class = 0;
  m.covariates = {};
  for (auto& a : m.attributes) a.distribution = spec::Distribution::Fixed;
  return m;
}

// Converged MNL coefficients of the matching fixed-coefficient model.
Fit warm_start(const ModelSpecification& spec, const dataset::ChoiceDataset& ds,
               const EstimationOptions& opts, unsigned threads, DesignMatrix& mnl_dm) {
  mnl_dm = spec::design_matrix(fixed_counterpart(spec), ds);
  const MnlLikelihood lik(mnl_dm, threads);
  return run(lik, to_vector(mnl_dm.start), opts);
}

void check_family(const ModelSpecification& spec, Family f) {
  if (spec.family != f)
    fail(ErrorCode::InvalidSpec, "expected a " + std::string(spec::family_name(f)) + " specification");
}

// Population standard deviation of each parameter's attribute, 1 for constants.
std::vector<double> start_scales(const DesignMatrix& dm) {
  std::vector<double> scale(dm.n_params(), 1.0);
  for (const auto& term : dm.terms) {
    if (!term.attribute || term.transform != spec::Transform::Linear) continue;
    double sum = 0.0, sq = 0.0, n = 0.0;
    for (const auto& grid : dm.attributes)
      for (const auto& alt : grid) {
        const double v = alt[static_cast<std::size_t>(*term.attribute)];
        sum += v;
        sq += v * v;
        n += 1.0;
      }
    const double var = sq / n - (sum / n) * (sum / n);
    if (var > 0.0) scale[term.param] = 1.0 / std::sqrt(var);
  }
  return scale;
}

// Orders classes by ascending cost coefficient and re-references the
// membership model on the new first class.
void relabel_classes(const DesignMatrix& dm, VectorXd& x) {
  const std::size_t classes = dm.n_classes;
  const auto cost_it = std::find(dm.param_names.begin(), dm.param_names.end(), "b_cost_1");
  if (classes < 2 || cost_it == dm.param_names.end()) return;
  const auto cost = static_cast<std::size_t>(cost_it - dm.param_names.begin());

  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[static_cast<Eigen::Index>(cost + a * dm.class_block)] <
           x[static_cast<Eigen::Index>(cost + b * dm.class_block)];
  });

  const VectorXd old = x;
  for (std::size_t c = 0; c < classes; ++c)
    x.segment(static_cast<Eigen::Index>(c * dm.class_block), static_cast<Eigen::Index>(dm.class_block)) =
        old.segment(static_cast<Eigen::Index>(order[c] * dm.class_block),
                    static_cast<Eigen::Index>(dm.class_block));

  const std::size_t width = dm.membership.size() / (classes - 1);
  auto delta = [&](std::size_t c, std::size_t j) {
    return c == 0 ? 0.0 : old[static_cast<Eigen::Index>(dm.membership[(c - 1) * width + j].param)];
  };
  for (std::size_t c = 1; c < classes; ++c)
    for (std::size_t j = 0; j < width; ++j)
      x[static_cast<Eigen::Index>(dm.membership[(c - 1) * width + j].param)] =
          delta(order[c], j) - delta(order[0], j);
}

}  // namespace

const char* status_name(EstimationStatus s) {
  switch (s) {
    case EstimationStatus::Ok: return "ok";
    case EstimationStatus::NotConverged: return "not_converged";
    case EstimationStatus::SingularHessian: return "singular_hessian";
    case EstimationStatus::BoundaryClassShare: return "boundary_class_share";
  }
  return "unknown";
}

std::size_t EstimationResult::index_of(const std::string& name) const {
  const auto it = std::find(param_names.begin(), param_names.end(), name);
  return static_cast<std::size_t>(it - param_names.begin());
}

double null_loglik(std::size_t rows) { return -static_cast<double>(rows) * std::log(3.0); }

EstimationResult estimate_mnl(const ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                              const EstimationOptions& opts) {
  check_family(spec, Family::MNL);
  const auto t0 = Clock::now();
  const unsigned threads = resolve_threads(opts.threads);
  const DesignMatrix dm = spec::design_matrix(spec, ds);
  const MnlLikelihood lik(dm, threads);
  auto res = finish(spec, lik, run(lik, to_vector(dm.start), opts), opts, threads);
  res.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

EstimationResult estimate_mmnl(const ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                               const EstimationOptions& opts) {
  check_family(spec, Family::MMNL);
  const auto t0 = Clock::now();
  const unsigned threads = resolve_threads(opts.threads);
  const DesignMatrix dm = spec::design_matrix(spec, ds);
  DesignMatrix mnl_dm;
  const Fit mnl = warm_start(spec, ds, opts, threads, mnl_dm);

  VectorXd x0 = to_vector(dm.start);
  for (std::size_t p = 0; p < mnl_dm.n_params(); ++p) {
    const auto it = std::find(dm.param_names.begin(), dm.param_names.end(), mnl_dm.param_names[p]);
    if (it != dm.param_names.end()) x0[it - dm.param_names.begin()] = mnl.x[static_cast<Eigen::Index>(p)];
  }
  for (const auto& rc : dm.random) {
    if (rc.distribution != spec::Distribution::Lognormal) continue;
    const auto mu = static_cast<Eigen::Index>(rc.mean_param);
    x0[mu] = std::log(std::max(rc.sign * x0[mu], 1e-4));
  }

  const DrawSet draws = halton_draws(dm.n_individuals(), opts.draws, dm.random.size());
  const MmnlLikelihood lik(dm, draws, threads);
  auto res = finish(spec, lik, run(lik, x0, opts), opts, threads);
  res.draws_used = opts.draws;
  res.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

EstimationResult estimate_lc(const ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                             const EstimationOptions& opts) {
  check_family(spec, Family::LC);
  if (opts.n_starts < 1) fail(ErrorCode::InvalidArgument, "at least one start is required");
  const auto t0 = Clock::now();
  const unsigned threads = resolve_threads(opts.threads);
  const DesignMatrix dm = spec::design_matrix(spec, ds);
  DesignMatrix mnl_dm;
  const Fit mnl = warm_start(spec, ds, opts, threads, mnl_dm);
  if (mnl_dm.n_params() != dm.class_block)
    fail(ErrorCode::InvalidSpec, "class utility does not match the fixed-coefficient model");

  VectorXd base = to_vector(dm.start);
  for (std::size_t c = 0; c < dm.n_classes; ++c)
    base.segment(static_cast<Eigen::Index>(c * dm.class_block), static_cast<Eigen::Index>(dm.class_block)) = mnl.x;
  const auto scale = start_scales(dm);
  std::vector<double> block_scale(dm.n_params(), 1.0);
  for (std::size_t p = 0; p < dm.n_params(); ++p)
    block_scale[p] = p < dm.n_classes * dm.class_block ? scale[p % dm.class_block] : 1.0;

  const LcLikelihood lik(dm, threads);
  Rng rng(opts.seed);
  std::vector<double> start_ll;
  Fit best;
  bool have_best = false;
  for (int s = 0; s < opts.n_starts; ++s) {
    VectorXd x0 = base;
    for (Eigen::Index p = 0; p < x0.size(); ++p)
      x0[p] += rng.uniform(-kStartSpread, kStartSpread) * block_scale[static_cast<std::size_t>(p)];
    x0 = x0.cwiseMax(to_vector(dm.lower)).cwiseMin(to_vector(dm.upper));
    Fit fit = run(lik, x0, opts);
    start_ll.push_back(fit.diagnostics.value);
    if (!have_best || fit.diagnostics.value > best.diagnostics.value) {
      best = std::move(fit);
      have_best = true;
    }
  }
  relabel_classes(dm, best.x);

  auto res = finish(spec, lik, best, opts, threads);
  res.n_starts = static_cast<std::size_t>(opts.n_starts);
  res.start_ll = std::move(start_ll);
  const VectorXd shares = lik.class_probabilities(best.x).colwise().mean();
  res.class_shares.assign(shares.data(), shares.data() + shares.size());
  if (res.status == EstimationStatus::Ok &&
      *std::min_element(res.class_shares.begin(), res.class_shares.end()) < kMinClassShare) {
    res.status = EstimationStatus::BoundaryClassShare;
    res.message = "a latent class share is below 1%";
  }
  res.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

EstimationResult estimate(const ModelSpecification& spec, const dataset::ChoiceDataset& ds,
                          const EstimationOptions& opts) {
  switch (spec.family) {
    case Family::MNL: return estimate_mnl(spec, ds, opts);
    case Family::MMNL: return estimate_mmnl(spec, ds, opts);
    case Family::LC: return estimate_lc(spec, ds, opts);
  }
  fail(ErrorCode::InvalidSpec, "unknown model family");
}

}  // namespace dcmsg::est
