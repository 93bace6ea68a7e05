#include "estimation/likelihood.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"
#include "common/numeric.hpp"
#include "estimation/utility.hpp"

namespace dcmsg::est {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void Likelihood::check_size(const VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != n_params())
    fail(ErrorCode::ArityMismatch, "expected " + std::to_string(n_params()) + " parameters, got " +
                                       std::to_string(theta.size()));
}

LogLik Likelihood::evaluate(const VectorXd& theta, bool with_gradient) const {
  check_size(theta);
  const std::size_t n = n_individuals();
  const std::size_t k = n_params();
  std::vector<double> ll(n);
  std::vector<double> g(with_gradient ? n * k : 0);
  parallel_for(n, threads_, [&](std::size_t i) {
    ll[i] = individual(i, theta.data(), with_gradient ? g.data() + i * k : nullptr);
  });

  LogLik out;
  out.ll = pairwise_sum(ll);
  if (with_gradient) {
    out.grad.resize(static_cast<Eigen::Index>(k));
    std::vector<double> column(n);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) column[i] = g[i * k + j];
      out.grad[static_cast<Eigen::Index>(j)] = pairwise_sum(column);
    }
  }
  return out;
}

MatrixXd Likelihood::scores(const VectorXd& theta) const {
  check_size(theta);
  const std::size_t n = n_individuals();
  const std::size_t k = n_params();
  std::vector<double> g(n * k);
  parallel_for(n, threads_, [&](std::size_t i) { individual(i, theta.data(), g.data() + i * k); });
  MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[i * k + j];
  return out;
}

MnlLikelihood::MnlLikelihood(const spec::DesignMatrix& dm, unsigned threads)
    : Likelihood(dm, threads) {}

double MnlLikelihood::individual(std::size_t n, const double* theta, double* grad) const {
  if (grad) std::fill(grad, grad + n_params(), 0.0);
  double ll = 0.0;
  for (std::size_t row = dm_.panel_offsets[n]; row < dm_.panel_offsets[n + 1]; ++row) {
    const auto lp = detail::log_probabilities(detail::row_utilities(dm_, row, theta));
    const auto chosen = static_cast<std::size_t>(dm_.choice[row]);
    ll += lp[chosen];
    if (grad) {
      detail::Utilities resid{};
      for (std::size_t a = 0; a < resid.size(); ++a) resid[a] = (a == chosen ? 1.0 : 0.0) - std::exp(lp[a]);
      detail::add_row_gradient(dm_, row, theta, resid, 1.0, grad);
    }
  }
  return ll;
}

MatrixXd MnlLikelihood::probabilities(const VectorXd& theta) const {
  MatrixXd p(static_cast<Eigen::Index>(dm_.n_rows()), dataset::kNumAlternatives);
  for (std::size_t row = 0; row < dm_.n_rows(); ++row) {
    const auto lp = detail::log_probabilities(detail::row_utilities(dm_, row, theta.data()));
    for (std::size_t a = 0; a < lp.size(); ++a)
      p(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a)) = std::exp(lp[a]);
  }
  return p;
}

std::unique_ptr<Likelihood> make_likelihood(const spec::DesignMatrix& dm, const DrawSet* draws,
                                            unsigned threads) {
  switch (dm.family) {
    case spec::Family::MNL:
      return std::make_unique<MnlLikelihood>(dm, threads);
    case spec::Family::MMNL:
      if (!draws) fail(ErrorCode::InvalidArgument, "mixed logit needs simulation draws");
      return std::make_unique<MmnlLikelihood>(dm, *draws, threads);
    case spec::Family::LC:
      return std::make_unique<LcLikelihood>(dm, threads);
  }
  fail(ErrorCode::InvalidSpec, "unknown model family");
}

LogLik mnl_loglik(const VectorXd& params, const spec::DesignMatrix& dm) {
  return MnlLikelihood(dm).evaluate(params);
}

LogLik mmnl_simulated_loglik(const VectorXd& params, const spec::DesignMatrix& dm,
                             const DrawSet& draws) {
  return MmnlLikelihood(dm, draws).evaluate(params);
}

LogLik lc_loglik(const VectorXd& params, const spec::DesignMatrix& dm) {
  return LcLikelihood(dm).evaluate(params);
}

}  // namespace dcmsg::est
