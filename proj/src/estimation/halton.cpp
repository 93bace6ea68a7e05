#include "estimation/halton.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "common/errors.hpp"

namespace dcmsg::est {

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

// Acklam's rational approximation followed by one Halley step on erfc.
double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

DrawSet halton_draws(std::size_t n_individuals, std::size_t draws, std::size_t dims,
                     std::vector<unsigned> primes, std::size_t burn_in) {
  if (dims > kMaxDrawDimensions || dims > primes.size())
    fail(ErrorCode::InvalidArgument, "at most two random dimensions are supported");
  if (draws == 0) fail(ErrorCode::InvalidArgument, "number of draws must be positive");
  std::vector<double> values(n_individuals * draws * dims);
  for (std::size_t dim = 0; dim < dims; ++dim) {
    for (std::size_t n = 0; n < n_individuals; ++n) {
      for (std::size_t r = 0; r < draws; ++r) {
        const std::uint64_t index = burn_in + n * draws + r + 1;
        values[(n * draws + r) * dims + dim] = normal_quantile(radical_inverse(index, primes[dim]));
      }
    }
  }
  return DrawSet(n_individuals, draws, dims, std::move(values));
}

}  // namespace dcmsg::est
