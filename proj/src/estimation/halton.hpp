#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dcmsg::est {

// Radical inverse of `index` in `base` (index 1 -> 1/base).
double radical_inverse(std::uint64_t index, unsigned base);

// Standard normal quantile.
double normal_quantile(double p);

// Standard normal draws for each individual: individual n owns a block of R
// consecutive points of one Halton sequence per dimension.
class DrawSet {
 public:
  DrawSet() = default;
  DrawSet(std::size_t n_individuals, std::size_t draws, std::size_t dims, std::vector<double> values)
      : n_individuals_(n_individuals), draws_(draws), dims_(dims), values_(std::move(values)) {}

  std::size_t n_individuals() const { return n_individuals_; }
  std::size_t draws() const { return draws_; }
  std::size_t dims() const { return dims_; }

  double operator()(std::size_t individual, std::size_t draw, std::size_t dim) const {
    return values_[(individual * draws_ + draw) * dims_ + dim];
  }

  bool operator==(const DrawSet&) const = default;

 private:
  std::size_t n_individuals_ = 0;
  std::size_t draws_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> values_;
};

inline constexpr std::size_t kMaxDrawDimensions = 2;

DrawSet halton_draws(std::size_t n_individuals, std::size_t draws, std::size_t dims,
                     std::vector<unsigned> primes = {2, 3}, std::size_t burn_in = 10);

}  // namespace dcmsg::est
