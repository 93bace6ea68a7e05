#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "common/errors.hpp"
#include "spec/design_matrix.hpp"

namespace dcmsg::est::detail {

using Utilities = std::array<double, dataset::kNumAlternatives>;

inline double attribute_level(const spec::DesignMatrix& dm, std::size_t row, std::size_t alt,
                              spec::Attribute a) {
  return dm.attributes[row][alt][static_cast<std::size_t>(a)];
}

// Value multiplying beta in `term` for (row, alt), ignoring the alternative mask.
inline double term_value(const spec::DesignMatrix& dm, const spec::UtilityTerm& term,
                         std::size_t row, std::size_t alt, const double* theta, std::size_t offset) {
  double v = 1.0;
  if (term.attribute) {
    const double lambda = term.lambda_param ? theta[*term.lambda_param + offset] : 1.0;
    v = spec::transform_value(term.transform, attribute_level(dm, row, alt, *term.attribute), lambda);
  }
  if (term.dummy)
    v *= term.dummy->value(dm.covariates[row][static_cast<std::size_t>(term.dummy->covariate)]);
  return v;
}

// Deterministic utilities of one choice task. Parameters of terms flagged in
// `skip` are left out; `offset` shifts all parameter indices (latent classes).
inline Utilities row_utilities(const spec::DesignMatrix& dm, std::size_t row, const double* theta,
                               std::size_t offset = 0, const std::vector<char>* skip = nullptr) {
  Utilities v{};
  for (const auto& term : dm.terms) {
    if (skip && (*skip)[term.param]) continue;
    const double beta = theta[term.param + offset];
    for (std::size_t alt = 0; alt < v.size(); ++alt)
      if (term.alt_mask & (1u << alt)) v[alt] += beta * term_value(dm, term, row, alt, theta, offset);
  }
  return v;
}

// Adds scale * sum_alt resid[alt] * dV[alt]/dtheta to grad.
inline void add_row_gradient(const spec::DesignMatrix& dm, std::size_t row, const double* theta,
                             const Utilities& resid, double scale, double* grad,
                             std::size_t offset = 0, const std::vector<char>* skip = nullptr) {
  for (const auto& term : dm.terms) {
    if (skip && (*skip)[term.param]) continue;
    const double beta = theta[term.param + offset];
    double g = 0.0, gl = 0.0;
    for (std::size_t alt = 0; alt < resid.size(); ++alt) {
      if (!(term.alt_mask & (1u << alt))) continue;
      g += resid[alt] * term_value(dm, term, row, alt, theta, offset);
      if (term.lambda_param) {
        double d = spec::transform_dlambda(attribute_level(dm, row, alt, *term.attribute),
                                           theta[*term.lambda_param + offset]);
        if (term.dummy)
          d *= term.dummy->value(dm.covariates[row][static_cast<std::size_t>(term.dummy->covariate)]);
        gl += resid[alt] * beta * d;
      }
    }
    grad[term.param + offset] += scale * g;
    if (term.lambda_param) grad[*term.lambda_param + offset] += scale * gl;
  }
}

// Log choice probabilities; throws NonFiniteUtility on overflow or NaN.
inline Utilities log_probabilities(const Utilities& v) {
  for (double x : v)
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteUtility, "utility is not finite");
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  const double lse = m + std::log(s);
  Utilities lp{};
  for (std::size_t a = 0; a < v.size(); ++a) lp[a] = v[a] - lse;
  return lp;
}

inline double log_sum_exp(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

}  // namespace dcmsg::est::detail
