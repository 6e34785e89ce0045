#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/metrics.hpp"
#include "srpelm/random.hpp"
#include "srpelm/ridge.hpp"

namespace srpelm {

struct LogRegModel {
  Vector weights;
  double intercept = 0.0;
  double lambda = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> loss_history;  // objective after every accepted step, starting point first
};

namespace detail {

// log(1 + exp(-t)) without overflow.
inline double log1p_exp_neg(double t) {
  return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// 1 / (1 + exp(t)).
inline double sigmoid_neg(double t) {
  if (t >= 0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

inline double sigmoid(double t) { return sigmoid_neg(-t); }

}  // namespace detail

/// Mean log-loss plus (lambda / 2) |w|^2; the intercept is not penalized.
inline double logistic_objective(const DenseMatrix& x, const Labels& y, const Vector& w, double b,
                                 double lambda) {
  const Vector margin = (x * w).array() + b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i)
    loss += detail::log1p_exp_neg(y[static_cast<std::size_t>(i)] * margin(i));
  return loss / static_cast<double>(y.size()) + 0.5 * lambda * w.squaredNorm();
}

/// Gradient of logistic_objective; the last entry is d/d intercept.
inline Vector logistic_gradient(const DenseMatrix& x, const Labels& y, const Vector& w, double b,
                                double lambda) {
  const Vector margin = (x * w).array() + b;
  Vector coef(margin.size());
  const double inv_n = 1.0 / static_cast<double>(y.size());
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    coef(i) = -yi * detail::sigmoid_neg(yi * margin(i)) * inv_n;
  }
  Vector g(w.size() + 1);
  g.head(w.size()) = x.transpose() * coef + lambda * w;
  g(w.size()) = coef.sum();
  return g;
}

/// Full-batch gradient descent with Armijo backtracking. Stops when the
/// gradient infinity norm drops below tol or after max_iter accepted steps.
/// A warm start, when given, supplies the initial weights.
inline LogRegModel logreg_fit(const DenseMatrix& x, const Labels& y, double lambda, std::size_t max_iter = 500,
                              double tol = 1e-6, const LogRegModel* warm = nullptr) {
  detail::require(x.rows() > 0, "logreg_fit: empty training set");
  check_labels(y, static_cast<std::size_t>(x.rows()), "logreg_fit");
  detail::require_param(tol > 0.0, "logreg_fit: tol must be positive");
  detail::require_param(lambda >= 0.0 && std::isfinite(lambda), "logreg_fit: lambda must be finite and >= 0");

  LogRegModel m;
  m.lambda = lambda;
  m.weights = Vector::Zero(x.cols());
  if (warm && warm->weights.size() == x.cols()) {
    m.weights = warm->weights;
    m.intercept = warm->intercept;
  }
  double f = logistic_objective(x, y, m.weights, m.intercept, lambda);
  if (!std::isfinite(f)) throw NumericalFailure("logreg_fit: non-finite objective", 0);
  m.loss_history.push_back(f);

  constexpr double armijo = 1e-4;
  double step = 1.0;
  const Eigen::Index d = x.cols();
  for (;;) {
    const Vector g = logistic_gradient(x, y, m.weights, m.intercept, lambda);
    if (!g.allFinite()) throw NumericalFailure("logreg_fit: non-finite gradient", m.iterations);
    if (g.cwiseAbs().maxCoeff() < tol) {
      m.converged = true;
      break;
    }
    if (m.iterations >= max_iter) break;
    const double g2 = g.squaredNorm();
    step *= 2.0;
    bool accepted = false;
    while (step > 1e-30) {
      const Vector w_try = m.weights - step * g.head(d);
      const double b_try = m.intercept - step * g(d);
      const double f_try = logistic_objective(x, y, w_try, b_try, lambda);
      if (std::isnan(f_try)) throw NumericalFailure("logreg_fit: non-finite objective", m.iterations + 1);
      if (f_try <= f - armijo * step * g2) {
        m.weights = w_try;
        m.intercept = b_try;
        f = f_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at double precision
    ++m.iterations;
    m.loss_history.push_back(f);
  }
  return m;
}

/// sigmoid(x w + b); the class is score > 0.5.
inline Vector logreg_predict(const LogRegModel& m, const DenseMatrix& x) {
  detail::require(x.cols() == m.weights.size(), "logreg_predict: feature dimension mismatch");
  Vector s = (x * m.weights).array() + m.intercept;
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = detail::sigmoid(s(i));
  return s;
}

struct LogRegSelection {
  double lambda = 0.0;
  std::vector<double> validation_auc;  // aligned with the grid
};

/// Picks lambda by held-out AUC on a seeded 80/20 split of (x, y). The grid is
/// walked from the largest value down, warm-starting each fit from the
/// previous one; AUC ties go to the larger lambda.
inline LogRegSelection logreg_select_lambda(const DenseMatrix& x, const Labels& y, std::vector<double> grid,
                                            std::uint64_t seed, std::size_t max_iter = 500, double tol = 1e-6) {
  detail::require(!grid.empty(), "logreg_select_lambda: empty grid");
  const auto n = static_cast<std::size_t>(x.rows());
  detail::require(n >= 5, "logreg_select_lambda: too few samples for a validation split");
  check_labels(y, n, "logreg_select_lambda");
  const std::size_t n_val = std::max<std::size_t>(1, n / 5);
  const auto val_idx = sample_without_replacement(n, n_val, seed);
  std::vector<std::size_t> fit_idx;
  for (std::size_t i = 0, v = 0; i < n; ++i) {
    if (v < val_idx.size() && val_idx[v] == i) {
      ++v;
      continue;
    }
    fit_idx.push_back(i);
  }
  const DenseMatrix x_fit = select_rows(x, fit_idx);
  const DenseMatrix x_val = select_rows(x, val_idx);
  Labels y_fit, y_val;
  for (auto i : fit_idx) y_fit.push_back(y[i]);
  for (auto i : val_idx) y_val.push_back(y[i]);

  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

  LogRegSelection sel;
  sel.validation_auc.assign(grid.size(), 0.0);
  double best_auc = -1.0;
  LogRegModel prev;
  bool have_prev = false;
  for (std::size_t k : order) {
    LogRegModel m = logreg_fit(x_fit, y_fit, grid[k], max_iter, tol, have_prev ? &prev : nullptr);
    const double auc = roc_auc(logreg_predict(m, x_val), y_val).value;
    sel.validation_auc[k] = auc;
    if (auc > best_auc) {  // strict: descending walk keeps the larger lambda on ties
      best_auc = auc;
      sel.lambda = grid[k];
    }
    prev = std::move(m);
    have_prev = true;
  }
  return sel;
}

}  // namespace srpelm
