#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "estimation/halton.hpp"
#include "spec/design_matrix.hpp"

namespace dcmsg::est {

struct LogLik {
  double ll = 0.0;
  Eigen::VectorXd grad;
};

// Panel log-likelihood assembled from per-individual contributions. The
// total and its gradient are reduced pairwise in individual order, so the
// result is independent of the number of worker threads.
class Likelihood {
 public:
  Likelihood(const spec::DesignMatrix& dm, unsigned threads) : dm_(dm), threads_(threads) {}
  virtual ~Likelihood() = default;

  const spec::DesignMatrix& design() const { return dm_; }
  std::size_t n_params() const { return dm_.n_params(); }
  std::size_t n_individuals() const { return dm_.n_individuals(); }

  // Contribution of individual n; grad (length K) is overwritten when non-null.
  virtual double individual(std::size_t n, const double* theta, double* grad) const = 0;

  // Choice probabilities, one row per choice task (rows x 3).
  virtual Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const = 0;

  LogLik evaluate(const Eigen::VectorXd& theta, bool with_gradient = true) const;

  // Per-individual score vectors (N x K).
  Eigen::MatrixXd scores(const Eigen::VectorXd& theta) const;

 protected:
  const spec::DesignMatrix& dm_;
  unsigned threads_;

 private:
  void check_size(const Eigen::VectorXd& theta) const;
};

class MnlLikelihood final : public Likelihood {
 public:
  explicit MnlLikelihood(const spec::DesignMatrix& dm, unsigned threads = 1);
  double individual(std::size_t n, const double* theta, double* grad) const override;
  Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const override;
};

class MmnlLikelihood final : public Likelihood {
 public:
  MmnlLikelihood(const spec::DesignMatrix& dm, const DrawSet& draws, unsigned threads = 1);
  double individual(std::size_t n, const double* theta, double* grad) const override;
  Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const override;

 private:
  const DrawSet& draws_;
  std::vector<char> skip_;  // means of random coefficients
};

class LcLikelihood final : public Likelihood {
 public:
  explicit LcLikelihood(const spec::DesignMatrix& dm, unsigned threads = 1);
  double individual(std::size_t n, const double* theta, double* grad) const override;
  Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const override;

  // Prior membership probabilities (N x C).
  Eigen::MatrixXd class_probabilities(const Eigen::VectorXd& theta) const;
};

std::unique_ptr<Likelihood> make_likelihood(const spec::DesignMatrix& dm, const DrawSet* draws,
                                            unsigned threads = 1);

LogLik mnl_loglik(const Eigen::VectorXd& params, const spec::DesignMatrix& dm);
LogLik mmnl_simulated_loglik(const Eigen::VectorXd& params, const spec::DesignMatrix& dm,
                             const DrawSet& draws);
LogLik lc_loglik(const Eigen::VectorXd& params, const spec::DesignMatrix& dm);

}  // namespace dcmsg::est
