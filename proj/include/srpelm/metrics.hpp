#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "srpelm/error.hpp"
#include "srpelm/features.hpp"
#include "srpelm/sparse_matrix.hpp"

namespace srpelm {

struct AucResult {
  double value = 0.5;
  bool degenerate = false;  // one of the classes is absent
};

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs ranked correctly, ties counting one half.
/// Computed from average ranks after one sort; the rank sum is kept in
/// doubled integer form so the result is exact.
inline AucResult roc_auc(std::span<const double> scores, const Labels& labels) {
  detail::require(scores.size() == labels.size(), "roc_auc: score and label counts differ");
  detail::require(!scores.empty(), "roc_auc: empty input");
  for (double s : scores) detail::require(!std::isnan(s), "roc_auc: NaN score");
  std::int64_t n_pos = 0;
  for (int l : labels) {
    detail::require(l == 1 || l == -1, "roc_auc: labels must be +1 or -1");
    n_pos += l == 1;
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) return {0.5, true};

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the rank sum of the positives; a tie group at sorted positions
  // [s, e) shares the average rank (s + 1 + e) / 2.
  std::int64_t twice_rank_sum = 0;
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s + 1;
    while (e < order.size() && scores[order[e]] == scores[order[s]]) ++e;
    std::int64_t pos_in_group = 0;
    for (std::size_t q = s; q < e; ++q) pos_in_group += labels[order[q]] == 1;
    twice_rank_sum += pos_in_group * static_cast<std::int64_t>(s + 1 + e);
    s = e;
  }
  const std::int64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return {static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg)),
          false};
}

inline AucResult roc_auc(const Vector& scores, const Labels& labels) {
  return roc_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), labels);
}

/// Fraction of samples whose decision (score > threshold -> +1) matches the label.
inline double accuracy(std::span<const double> scores, const Labels& labels, double threshold) {
  detail::require(scores.size() == labels.size(), "accuracy: score and label counts differ");
  detail::require(!scores.empty(), "accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hits += (scores[i] > threshold ? 1 : -1) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

inline double accuracy(const Vector& scores, const Labels& labels, double threshold) {
  return accuracy(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), labels,
                  threshold);
}

/// ROC curve points (false positive rate, true positive rate), one per
/// distinct threshold from the highest score down, starting at (0, 0).
inline std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores, const Labels& labels) {
  detail::require(scores.size() == labels.size(), "roc_curve: score and label counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0, neg = 0;
  for (int l : labels) (l == 1 ? pos : neg) += 1;
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s;
    while (e < order.size() && scores[order[e]] == scores[order[s]]) {
      (labels[order[e]] == 1 ? tp : fp) += 1;
      ++e;
    }
    pts.emplace_back(neg > 0 ? fp / neg : 0.0, pos > 0 ? tp / pos : 0.0);
    s = e;
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Student t distribution

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  detail::require(a > 0 && b > 0, "incomplete_beta: shape parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| >= |t|) for T ~ Student t(dof).
inline double student_t_two_sided(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

struct TTestResult {
  double p_value = 1.0;
  double t_statistic = 0.0;
  bool degenerate = false;  // zero-variance differences
};

/// Two-sided paired t-test on per-run metric pairs.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size(), "paired_t_test: run counts differ");
  detail::require(a.size() >= 2, "paired_t_test: at least two pairs required");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    all_zero = all_zero && d == 0.0;
    ss += (d - mean) * (d - mean);
  }
  if (all_zero) return {1.0, 0.0, true};
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd <= 1e-12 * std::abs(mean)) return {0.0, mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(), true};
  const double t = mean / (sd / std::sqrt(n));
  return {student_t_two_sided(t, n - 1.0), t, false};
}

inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  return paired_t_test(std::span<const double>(a), std::span<const double>(b));
}

// ---------------------------------------------------------------------------
// Aggregation across repeated runs

/// Per-run results of one method. Runs are identified by index so that
/// methods with failed runs still pair correctly.
struct MethodRuns {
  std::string name;
  std::vector<std::size_t> run_ids;
  std::vector<double> aucs;
  std::vector<double> accuracies;
  std::vector<double> seconds;
  std::size_t failures = 0;
};

struct MethodSummary {
  std::string name;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double time_mean_s = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  bool in_best_set = false;
  std::vector<double> run_aucs;
};

struct EvalReport {
  std::vector<MethodSummary> methods;
  DenseMatrix p_values;  // symmetric, unit diagonal
  std::size_t best = 0;
  double alpha = 0.05;

  std::vector<std::string> best_set() const {
    std::vector<std::string> out;
    for (const auto& m : methods)
      if (m.in_best_set) out.push_back(m.name);
    return out;
  }
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// AUC pairs of two methods on the runs both completed.
inline std::pair<std::vector<double>, std::vector<double>> common_runs(const MethodRuns& a, const MethodRuns& b) {
  std::pair<std::vector<double>, std::vector<double>> out;
  std::size_t i = 0, j = 0;
  while (i < a.run_ids.size() && j < b.run_ids.size()) {
    if (a.run_ids[i] < b.run_ids[j]) {
      ++i;
    } else if (b.run_ids[j] < a.run_ids[i]) {
      ++j;
    } else {
      out.first.push_back(a.aucs[i++]);
      out.second.push_back(b.aucs[j++]);
    }
  }
  return out;
}

/// Mean/std per method, pairwise paired t-tests on AUC, and the set of
/// methods not significantly worse than the best-mean one at level alpha.
inline EvalReport summarize(const std::vector<MethodRuns>& runs, double alpha = 0.05) {
  detail::require(!runs.empty(), "summarize: no methods");
  detail::require_param(alpha > 0.0 && alpha < 1.0, "summarize: alpha must lie in (0, 1)");
  for (const auto& r : runs) {
    if (r.aucs.size() < 2 || r.run_ids.size() != r.aucs.size())
      throw ContractViolation("summarize: method '" + r.name + "' needs at least two runs");
    if (!std::is_sorted(r.run_ids.begin(), r.run_ids.end()))
      throw ContractViolation("summarize: run ids must be ascending");
  }
  EvalReport rep;
  rep.alpha = alpha;
  for (const auto& r : runs) {
    MethodSummary s;
    s.name = r.name;
    s.auc_mean = detail::mean_of(r.aucs);
    s.auc_std = detail::sample_std(r.aucs);
    s.accuracy_mean = detail::mean_of(r.accuracies);
    s.accuracy_std = detail::sample_std(r.accuracies);
    s.time_mean_s = detail::mean_of(r.seconds);
    s.runs = r.aucs.size();
    s.failures = r.failures;
    s.run_aucs = r.aucs;
    rep.methods.push_back(std::move(s));
  }
  const auto m = static_cast<Eigen::Index>(runs.size());
  rep.p_values = DenseMatrix::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      auto [a, b] = common_runs(runs[static_cast<std::size_t>(i)], runs[static_cast<std::size_t>(j)]);
      const double p = a.size() >= 2 ? paired_t_test(a, b).p_value : 1.0;
      rep.p_values(i, j) = rep.p_values(j, i) = p;
    }
  for (std::size_t i = 1; i < rep.methods.size(); ++i)
    if (rep.methods[i].auc_mean > rep.methods[rep.best].auc_mean) rep.best = i;
  for (std::size_t i = 0; i < rep.methods.size(); ++i)
    rep.methods[i].in_best_set =
        i == rep.best || rep.p_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(rep.best)) > alpha;
  return rep;
}

}  // namespace srpelm
