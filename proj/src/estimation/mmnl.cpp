#include <cmath>

#include "common/errors.hpp"
#include "estimation/likelihood.hpp"
#include "estimation/utility.hpp"

namespace dcmsg::est {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Coefficient {
  double value, d_mean, d_sd;
};

Coefficient draw_coefficient(const spec::RandomCoefficient& rc, const double* theta, double xi) {
  const double mu = theta[rc.mean_param];
  const double sigma = theta[rc.sd_param];
  if (rc.distribution == spec::Distribution::Lognormal) {
    const double e = rc.sign * std::exp(mu + sigma * xi);
    return {e, e, e * xi};
  }
  return {mu + sigma * xi, 1.0, xi};
}

}  // namespace

MmnlLikelihood::MmnlLikelihood(const spec::DesignMatrix& dm, const DrawSet& draws, unsigned threads)
    : Likelihood(dm, threads), draws_(draws), skip_(dm.n_params(), 0) {
  if (draws.n_individuals() != dm.n_individuals() || draws.dims() < dm.random.size())
    fail(ErrorCode::InvalidArgument, "draw set does not match the panel");
  for (const auto& rc : dm.random) skip_[rc.mean_param] = 1;
}

double MmnlLikelihood::individual(std::size_t n, const double* theta, double* grad) const {
  const std::size_t first = dm_.panel_offsets[n];
  const std::size_t tasks = dm_.panel_offsets[n + 1] - first;
  const std::size_t draws = draws_.draws();
  const std::size_t nk = dm_.random.size();
  constexpr std::size_t J = dataset::kNumAlternatives;

  std::vector<detail::Utilities> fixed(tasks);
  for (std::size_t t = 0; t < tasks; ++t) fixed[t] = detail::row_utilities(dm_, first + t, theta, 0, &skip_);

  std::vector<double> sim(draws);
  std::vector<double> prob(grad ? draws * tasks * J : 0);
  std::vector<double> d_mean(grad ? draws * nk : 0), d_sd(grad ? draws * nk : 0), h(grad ? draws * nk : 0);
  std::vector<Coefficient> beta(nk);

  for (std::size_t r = 0; r < draws; ++r) {
    for (std::size_t k = 0; k < nk; ++k) beta[k] = draw_coefficient(dm_.random[k], theta, draws_(n, r, k));
    double s = 0.0;
    for (std::size_t t = 0; t < tasks; ++t) {
      const std::size_t row = first + t;
      auto v = fixed[t];
      for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t a = 0; a < J; ++a)
          v[a] += beta[k].value * detail::attribute_level(dm_, row, a, dm_.random[k].attribute);
      const auto lp = detail::log_probabilities(v);
      const auto chosen = static_cast<std::size_t>(dm_.choice[row]);
      s += lp[chosen];
      if (!grad) continue;
      for (std::size_t a = 0; a < J; ++a) {
        const double p = std::exp(lp[a]);
        prob[(r * tasks + t) * J + a] = p;
        const double resid = (a == chosen ? 1.0 : 0.0) - p;
        for (std::size_t k = 0; k < nk; ++k)
          h[r * nk + k] += resid * detail::attribute_level(dm_, row, a, dm_.random[k].attribute);
      }
    }
    sim[r] = s;
    if (grad)
      for (std::size_t k = 0; k < nk; ++k) {
        d_mean[r * nk + k] = beta[k].d_mean;
        d_sd[r * nk + k] = beta[k].d_sd;
      }
  }

  const double log_total = detail::log_sum_exp(sim.data(), draws);
  const double ll = log_total - std::log(static_cast<double>(draws));
  if (!grad) return ll;

  std::fill(grad, grad + n_params(), 0.0);
  std::vector<double> w(draws);
  for (std::size_t r = 0; r < draws; ++r) w[r] = std::exp(sim[r] - log_total);

  for (std::size_t t = 0; t < tasks; ++t) {
    const auto chosen = static_cast<std::size_t>(dm_.choice[first + t]);
    detail::Utilities resid{};
    for (std::size_t a = 0; a < J; ++a) {
      double expected = 0.0;
      for (std::size_t r = 0; r < draws; ++r) expected += w[r] * prob[(r * tasks + t) * J + a];
      resid[a] = (a == chosen ? 1.0 : 0.0) - expected;
    }
    detail::add_row_gradient(dm_, first + t, theta, resid, 1.0, grad, 0, &skip_);
  }
  for (std::size_t k = 0; k < nk; ++k) {
    double gm = 0.0, gs = 0.0;
    for (std::size_t r = 0; r < draws; ++r) {
      gm += w[r] * h[r * nk + k] * d_mean[r * nk + k];
      gs += w[r] * h[r * nk + k] * d_sd[r * nk + k];
    }
    grad[dm_.random[k].mean_param] += gm;
    grad[dm_.random[k].sd_param] += gs;
  }
  return ll;
}

// Unconditional probabilities, averaged over the draws of each individual.
MatrixXd MmnlLikelihood::probabilities(const VectorXd& theta) const {
  constexpr std::size_t J = dataset::kNumAlternatives;
  MatrixXd p = MatrixXd::Zero(static_cast<Eigen::Index>(dm_.n_rows()), J);
  const std::size_t draws = draws_.draws();
  for (std::size_t n = 0; n < dm_.n_individuals(); ++n) {
    for (std::size_t row = dm_.panel_offsets[n]; row < dm_.panel_offsets[n + 1]; ++row) {
      const auto fixed = detail::row_utilities(dm_, row, theta.data(), 0, &skip_);
      for (std::size_t r = 0; r < draws; ++r) {
        auto v = fixed;
        for (std::size_t k = 0; k < dm_.random.size(); ++k) {
          const double b = draw_coefficient(dm_.random[k], theta.data(), draws_(n, r, k)).value;
          for (std::size_t a = 0; a < J; ++a)
            v[a] += b * detail::attribute_level(dm_, row, a, dm_.random[k].attribute);
        }
        const auto lp = detail::log_probabilities(v);
        for (std::size_t a = 0; a < J; ++a)
          p(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a)) += std::exp(lp[a]);
      }
      p.row(static_cast<Eigen::Index>(row)) /= static_cast<double>(draws);
    }
  }
  return p;
}

}  // namespace dcmsg::est
