#include <cmath>

#include "common/errors.hpp"
#include "estimation/likelihood.hpp"
#include "estimation/utility.hpp"

namespace dcmsg::est {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr std::size_t kMaxClasses = 3;

double membership_value(const spec::MembershipTerm& m, const std::array<double, dataset::kNumCovariates>& cov) {
  return m.dummy ? m.dummy->value(cov[static_cast<std::size_t>(m.dummy->covariate)]) : 1.0;
}

// Log prior class probabilities of the individual whose first row is `row`.
std::array<double, kMaxClasses> log_shares(const spec::DesignMatrix& dm, std::size_t row,
                                           const double* theta) {
  std::array<double, kMaxClasses> u{};
  for (const auto& m : dm.membership) u[m.class_index] += theta[m.param] * membership_value(m, dm.covariates[row]);
  const double lse = detail::log_sum_exp(u.data(), dm.n_classes);
  for (std::size_t c = 0; c < dm.n_classes; ++c) u[c] -= lse;
  return u;
}

}  // namespace

LcLikelihood::LcLikelihood(const spec::DesignMatrix& dm, unsigned threads) : Likelihood(dm, threads) {
  if (dm.n_classes < 1 || dm.n_classes > kMaxClasses)
    fail(ErrorCode::InvalidSpec, "latent class models have one to three classes");
}

double LcLikelihood::individual(std::size_t n, const double* theta, double* grad) const {
  const std::size_t first = dm_.panel_offsets[n];
  const std::size_t last = dm_.panel_offsets[n + 1];
  const std::size_t classes = dm_.n_classes;
  constexpr std::size_t J = dataset::kNumAlternatives;

  const auto lpi = log_shares(dm_, first, theta);
  std::array<double, kMaxClasses> joint{};
  std::vector<detail::Utilities> lp(classes * (last - first));
  for (std::size_t c = 0; c < classes; ++c) {
    double s = 0.0;
    for (std::size_t row = first; row < last; ++row) {
      auto& l = lp[c * (last - first) + (row - first)];
      l = detail::log_probabilities(detail::row_utilities(dm_, row, theta, c * dm_.class_block));
      s += l[static_cast<std::size_t>(dm_.choice[row])];
    }
    joint[c] = lpi[c] + s;
  }
  const double ll = detail::log_sum_exp(joint.data(), classes);
  if (!grad) return ll;

  std::fill(grad, grad + n_params(), 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    const double w = std::exp(joint[c] - ll);  // posterior membership
    for (std::size_t row = first; row < last; ++row) {
      const auto& l = lp[c * (last - first) + (row - first)];
      const auto chosen = static_cast<std::size_t>(dm_.choice[row]);
      detail::Utilities resid{};
      for (std::size_t a = 0; a < J; ++a) resid[a] = (a == chosen ? 1.0 : 0.0) - std::exp(l[a]);
      detail::add_row_gradient(dm_, row, theta, resid, w, grad, c * dm_.class_block);
    }
  }
  for (const auto& m : dm_.membership) {
    const std::size_t c = m.class_index;
    grad[m.param] += (std::exp(joint[c] - ll) - std::exp(lpi[c])) * membership_value(m, dm_.covariates[first]);
  }
  return ll;
}

MatrixXd LcLikelihood::class_probabilities(const VectorXd& theta) const {
  MatrixXd pi(static_cast<Eigen::Index>(dm_.n_individuals()), static_cast<Eigen::Index>(dm_.n_classes));
  for (std::size_t n = 0; n < dm_.n_individuals(); ++n) {
    const auto lpi = log_shares(dm_, dm_.panel_offsets[n], theta.data());
    for (std::size_t c = 0; c < dm_.n_classes; ++c)
      pi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) = std::exp(lpi[c]);
  }
  return pi;
}

MatrixXd LcLikelihood::probabilities(const VectorXd& theta) const {
  constexpr std::size_t J = dataset::kNumAlternatives;
  MatrixXd p = MatrixXd::Zero(static_cast<Eigen::Index>(dm_.n_rows()), J);
  const MatrixXd pi = class_probabilities(theta);
  for (std::size_t n = 0; n < dm_.n_individuals(); ++n)
    for (std::size_t row = dm_.panel_offsets[n]; row < dm_.panel_offsets[n + 1]; ++row)
      for (std::size_t c = 0; c < dm_.n_classes; ++c) {
        const auto lp = detail::log_probabilities(detail::row_utilities(dm_, row, theta.data(), c * dm_.class_block));
        for (std::size_t a = 0; a < J; ++a)
          p(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a)) +=
              pi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) * std::exp(lp[a]);
      }
  return p;
}

}  // namespace dcmsg::est
