#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "srpelm/error.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

/// Powers of two 2^lo .. 2^hi inclusive. The default is the 41-point grid
/// 2^-20 .. 2^20.
inline std::vector<double> lambda_grid(int lo_exp = -20, int hi_exp = 20) {
  detail::require_param(lo_exp <= hi_exp, "lambda_grid: empty exponent range");
  std::vector<double> g;
  for (int e = lo_exp; e <= hi_exp; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

/// Output weights and the regularization chosen by leave-one-out PRESS.
struct RidgeSolution {
  DenseMatrix beta;
  double lambda = 0.0;
  double press = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> press_by_lambda;
};

/// Ridge regression for a whole grid of regularization values from a single
/// symmetric eigendecomposition.
///
/// With feature matrix H (N x L) the hat matrix H (H^T H + lambda I)^-1 H^T
/// equals B diag(w) B^T for an orthonormal-ish basis B:
///   L <= N: H^T H = V E V^T, B = H V,  w_k = 1 / (e_k + lambda)
///   L >  N: H H^T = Q E Q^T, B = Q,    w_k = e_k / (e_k + lambda)
/// and a precomputed kernel K is handled like the second case. Fitted values,
/// leverages and PRESS for any lambda then cost O(N r) instead of a new
/// factorization.
class SpectralRidge {
 public:
  static SpectralRidge from_features(const DenseMatrix& h, const DenseMatrix& y) {
    detail::require(h.rows() == y.rows(), "ridge: H and Y row counts differ");
    detail::require(h.rows() > 0 && h.cols() > 0, "ridge: empty design matrix");
    detail::require(h.allFinite() && y.allFinite(), "ridge: non-finite input");
    SpectralRidge s;
    s.y_ = y;
    if (h.cols() <= h.rows()) {
      s.mode_ = Mode::primal;
      s.gram_ = h.transpose() * h;
      s.decompose(s.gram_);
      s.basis_ = h * s.vecs_;
    } else {
      s.mode_ = Mode::dual;
      s.features_ = h;
      s.gram_ = h * h.transpose();
      s.decompose(s.gram_);
      s.basis_ = s.vecs_;
    }
    s.proj_y_ = s.basis_.transpose() * y;
    return s;
  }

  static SpectralRidge from_kernel(const DenseMatrix& k, const DenseMatrix& y) {
    detail::require(k.rows() == k.cols(), "ridge: kernel matrix must be square");
    detail::require(k.rows() == y.rows(), "ridge: kernel and target row counts differ");
    detail::require(k.rows() > 0, "ridge: empty kernel");
    detail::require(k.allFinite() && y.allFinite(), "ridge: non-finite input");
    SpectralRidge s;
    s.mode_ = Mode::kernel;
    s.y_ = y;
    s.gram_ = 0.5 * (k + k.transpose());
    s.decompose(s.gram_);
    s.basis_ = s.vecs_;
    s.proj_y_ = s.basis_.transpose() * y;
    return s;
  }

  Eigen::Index samples() const { return y_.rows(); }
  const Vector& eigenvalues() const { return evals_; }

  /// False when lambda + e_k vanishes for some retained direction.
  bool solvable(double lambda) const {
    const double tol = 1e-13 * std::max(1.0, evals_.size() ? evals_.maxCoeff() : 0.0);
    return lambda >= 0.0 && (evals_.array() + lambda).minCoeff() > tol;
  }

  Vector leverage(double lambda) const {
    const Vector w = hat_weights(lambda);
    return basis_.array().square().matrix() * w;
  }

  Eigen::MatrixXd fitted(double lambda) const {
    return basis_ * (hat_weights(lambda).asDiagonal() * proj_y_);
  }

  /// Leave-one-out sum of squared errors sum_i |(y_i - yhat_i) / (1 - h_ii)|^2.
  /// Infinite when the system is singular or some leverage reaches 1.
  double press(double lambda) const {
    if (!solvable(lambda)) return std::numeric_limits<double>::infinity();
    const Vector h = leverage(lambda);
    const Eigen::MatrixXd resid = y_ - fitted(lambda);
    double total = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      const double denom = 1.0 - h(i);
      if (!(denom > 1e-12)) return std::numeric_limits<double>::infinity();
      total += (resid.row(i) / denom).squaredNorm();
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
  }

  /// Primal weights (H^T H + lambda I)^-1 H^T Y, one refinement step applied.
  DenseMatrix beta(double lambda) const {
    detail::require(mode_ != Mode::kernel, "ridge: primal weights unavailable for a kernel fit");
    detail::require(solvable(lambda), "ridge: singular system for this lambda");
    if (mode_ == Mode::dual) return features_.transpose() * dual_coefficients(lambda);
    const Vector inv = (evals_.array() + lambda).inverse();
    Eigen::MatrixXd b = vecs_ * (inv.asDiagonal() * proj_y_);
    // proj_y_ = V^T H^T Y, so H^T Y = V proj_y_.
    const Eigen::MatrixXd rhs = vecs_ * proj_y_;
    const Eigen::MatrixXd r = rhs - (gram_ * b + lambda * b);
    b += vecs_ * (inv.asDiagonal() * (vecs_.transpose() * r));
    return b;
  }

  /// Dual coefficients (K + lambda I)^-1 Y with K the sample Gram/kernel
  /// matrix, refined twice against the explicit K.
  DenseMatrix dual_coefficients(double lambda) const {
    detail::require(mode_ != Mode::primal, "ridge: dual coefficients unavailable for a primal fit");
    detail::require(solvable(lambda), "ridge: singular system for this lambda");
    const Vector inv = (evals_.array() + lambda).inverse();
    auto solve = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
      return vecs_ * (inv.asDiagonal() * (vecs_.transpose() * rhs));
    };
    Eigen::MatrixXd a = vecs_ * (inv.asDiagonal() * proj_y_);
    for (int it = 0; it < 2; ++it) a += solve(y_ - (gram_ * a + lambda * a));
    return a;
  }

 private:
  enum class Mode { primal, dual, kernel };

  void decompose(const Eigen::MatrixXd& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.info() != Eigen::Success) throw DegenerateFitError("ridge: eigendecomposition failed");
    evals_ = es.eigenvalues().cwiseMax(0.0);
    vecs_ = es.eigenvectors();
  }

  Vector hat_weights(double lambda) const {
    const Vector denom = (evals_.array() + lambda).matrix();
    if (mode_ == Mode::primal) return denom.cwiseInverse();
    return evals_.cwiseQuotient(denom);
  }

  Mode mode_ = Mode::primal;
  Eigen::MatrixXd y_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd features_;
  Eigen::MatrixXd vecs_;
  Vector evals_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd proj_y_;
};

struct LambdaChoice {
  double lambda = 0.0;
  double press = 0.0;
  std::vector<double> press_by_lambda;
};

/// Arg-min of PRESS over the grid; ties go to the larger lambda.
inline LambdaChoice select_lambda(const SpectralRidge& s, const std::vector<double>& grid) {
  detail::require(!grid.empty(), "ridge: empty lambda grid");
  for (double l : grid)
    detail::require_param(std::isfinite(l) && l >= 0.0, "ridge: lambda values must be finite and >= 0");
  LambdaChoice c;
  c.press = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double l : grid) {
    const double p = s.press(l);
    c.press_by_lambda.push_back(p);
    if (!std::isfinite(p)) continue;
    if (!found || p < c.press || (p == c.press && l > c.lambda)) {
      c.lambda = l;
      c.press = p;
      found = true;
    }
  }
  if (!found) throw DegenerateFitError("ridge: every lambda in the grid gives a degenerate fit");
  return c;
}

inline RidgeSolution solve_ridge_press(const DenseMatrix& h, const DenseMatrix& y,
                                       const std::vector<double>& grid) {
  const auto s = SpectralRidge::from_features(h, y);
  auto choice = select_lambda(s, grid);
  RidgeSolution sol;
  sol.beta = s.beta(choice.lambda);
  sol.lambda = choice.lambda;
  sol.press = choice.press;
  sol.lambda_grid = grid;
  sol.press_by_lambda = std::move(choice.press_by_lambda);
  return sol;
}

}  // namespace srpelm
