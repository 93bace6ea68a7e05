#include "estimation/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace dcmsg::est {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kSingularTolerance = 1e-9;

void require_square(const MatrixXd& h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    fail(ErrorCode::InvalidArgument, "hessian must be a non-empty square matrix");
}

// Symmetrized H^-1, validated first.
MatrixXd checked_inverse(const MatrixXd& hessian) {
  require_square(hessian);
  if (is_singular(hessian)) fail(ErrorCode::SingularHessian, "hessian is singular");
  const MatrixXd inv = hessian.partialPivLu().inverse();
  return 0.5 * (inv + inv.transpose());
}

// Eigenvalues of D H D with D = diag(|H_ii|^-1/2), ascending; empty if undefined.
VectorXd scaled_eigenvalues(const MatrixXd& hessian) {
  if (!hessian.allFinite()) return {};
  const VectorXd diag = hessian.diagonal().cwiseAbs();
  if (diag.minCoeff() == 0.0) return {};
  const VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  const MatrixXd m = scale.asDiagonal() * hessian * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return {};
  return eig.eigenvalues();
}

}  // namespace

MatrixXd numerical_hessian(const Likelihood& lik, const VectorXd& theta) {
  const Eigen::Index k = theta.size();
  MatrixXd h(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(theta[j]));
    VectorXd up = theta, down = theta;
    up[j] += step;
    down[j] -= step;
    h.col(j) = (lik.evaluate(up).grad - lik.evaluate(down).grad) / (up[j] - down[j]);
  }
  return 0.5 * (h + h.transpose());
}

bool is_singular(const MatrixXd& hessian) {
  require_square(hessian);
  const VectorXd ev = scaled_eigenvalues(hessian);
  if (ev.size() == 0) return true;
  const double largest = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.cwiseAbs().minCoeff() < kSingularTolerance * largest;
}

bool is_local_maximum(const MatrixXd& hessian) {
  require_square(hessian);
  const VectorXd ev = scaled_eigenvalues(hessian);
  if (ev.size() == 0) return false;
  const double largest = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev[ev.size() - 1] < -kSingularTolerance * largest;
}

MatrixXd classical_covariance(const MatrixXd& hessian) { return -checked_inverse(hessian); }

MatrixXd robust_covariance(const MatrixXd& hessian, const MatrixXd& scores) {
  if (scores.cols() != hessian.cols())
    fail(ErrorCode::ArityMismatch, "score vectors and hessian differ in dimension");
  const MatrixXd bread = checked_inverse(hessian);
  const MatrixXd meat = scores.transpose() * scores;
  const MatrixXd v = bread * meat * bread;
  return 0.5 * (v + v.transpose());
}

}  // namespace dcmsg::est
