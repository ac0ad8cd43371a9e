#pragma once

// Slow, simple projected-gradient solver for the gamma-space dual. Serves
// as a correctness oracle and timing baseline for the SMO solver and shares
// none of its code paths.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ocssvm/core_types.hpp"
#include "ocssvm/kernels.hpp"

namespace ocssvm::qp {

struct QpProblem {
  std::size_t m = 0;
  std::vector<double> gram;  // m x m, row-major
  double lower = 0.0;
  double upper = 0.0;
  double sum_target = 0.0;

  double k(std::size_t i, std::size_t j) const { return gram[i * m + j]; }

  void validate() const {
    if (gram.size() != m * m) throw DimensionMismatch("gram matrix is not m x m");
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (std::abs(k(i, j) - k(j, i)) > 1e-12) throw Error("gram matrix is not symmetric");
    const double md = static_cast<double>(m);
    if (lower > upper || md * lower > sum_target + 1e-12 || md * upper < sum_target - 1e-12)
      throw Infeasible("box and sum constraints have no common point");
  }
};

// Dense Gram matrix and bounds for a training matrix and hyperparameters.
inline QpProblem make_problem(const Matrix& x, const HyperParams& p) {
  validate_params(p, x.rows());
  const KernelSpec spec = p.kernel.resolved(x.cols());
  const GammaBox box = gamma_box(p, x.rows());
  QpProblem prob;
  prob.m = x.rows();
  prob.gram.resize(prob.m * prob.m);
  for (std::size_t i = 0; i < prob.m; ++i)
    for (std::size_t j = i; j < prob.m; ++j) {
      const double v = kernel_value(spec, x.row(i), x.row(j));
      prob.gram[i * prob.m + j] = v;
      prob.gram[j * prob.m + i] = v;
    }
  prob.lower = box.lower;
  prob.upper = box.upper;
  prob.sum_target = box.sum_target;
  return prob;
}

inline double dense_objective(const QpProblem& prob, std::span<const double> gamma) {
  if (gamma.size() != prob.m) throw DimensionMismatch("gamma length differs from gram size");
  double total = 0.0;
  for (std::size_t i = 0; i < prob.m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < prob.m; ++j) row += prob.k(i, j) * gamma[j];
    total += gamma[i] * row;
  }
  return 0.5 * total;
}

// Euclidean projection onto {lower <= x_i <= upper, sum x = sum_target}.
// The solution is clamp(v - theta) for the unique shift theta, located by
// bisection; the last rounding residue goes to the unclamped coordinates.
inline std::vector<double> project_box_simplex(std::span<const double> v, double lower,
                                               double upper, double sum_target) {
  const std::size_t m = v.size();
  const double md = static_cast<double>(m);
  if (m == 0 || lower > upper || md * lower > sum_target + 1e-12 ||
      md * upper < sum_target - 1e-12)
    throw Infeasible("box and sum constraints have no common point");

  double sum = 0.0;
  bool inside = true;
  for (double x : v) {
    sum += x;
    inside = inside && x >= lower && x <= upper;
  }
  if (inside && std::abs(sum - sum_target) <= 1e-12) return {v.begin(), v.end()};

  const auto clamped_sum = [&](double theta) {
    double s = 0.0;
    for (double x : v) s += std::clamp(x - theta, lower, upper);
    return s;
  };

  // clamped_sum is non-increasing in theta.
  double lo = *std::min_element(v.begin(), v.end()) - upper;
  double hi = *std::max_element(v.begin(), v.end()) - lower;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (clamped_sum(mid) > sum_target)
      lo = mid;
    else
      hi = mid;
  }
  const double theta = 0.5 * (lo + hi);

  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = std::clamp(v[i] - theta, lower, upper);

  for (int pass = 0; pass < 4; ++pass) {
    double s = 0.0;
    std::size_t free = 0;
    for (double xi : x) {
      s += xi;
      if (xi > lower && xi < upper) ++free;
    }
    const double residual = sum_target - s;
    if (residual == 0.0 || free == 0) break;
    const double share = residual / static_cast<double>(free);
    for (double& xi : x)
      if (xi > lower && xi < upper) xi = std::clamp(xi + share, lower, upper);
  }
  return x;
}

// 1 / lambda_max(K) from 50 power-iteration steps.
inline double default_step(const QpProblem& prob) {
  if (prob.m == 0) return 1.0;
  std::vector<double> v(prob.m, 1.0 / std::sqrt(static_cast<double>(prob.m)));
  std::vector<double> w(prob.m);
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    for (std::size_t i = 0; i < prob.m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < prob.m; ++j) s += prob.k(i, j) * v[j];
      w[i] = s;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 1.0;
    lambda = norm;
    for (std::size_t i = 0; i < prob.m; ++i) v[i] = w[i] / norm;
  }
  return lambda > 0.0 ? 1.0 / lambda : 1.0;
}

struct QpSolution {
  std::vector<double> gamma;
  std::size_t iterations = 0;
  double objective = 0.0;
  double seconds = 0.0;
};

// g <- project(g - step * K g) until the update is below 1e-10 in max norm
// or iters steps have run.
inline QpSolution solve_projected_gradient(const QpProblem& prob, double step, std::size_t iters) {
  if (!(step > 0.0)) throw Error("projected gradient step must be > 0");
  prob.validate();
  const auto t0 = std::chrono::steady_clock::now();

  QpSolution sol;
  std::vector<double> g(prob.m, prob.sum_target / static_cast<double>(prob.m));
  g = project_box_simplex(g, prob.lower, prob.upper, prob.sum_target);

  std::vector<double> trial(prob.m);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < prob.m; ++i) {
      double grad = 0.0;
      for (std::size_t j = 0; j < prob.m; ++j) grad += prob.k(i, j) * g[j];
      trial[i] = g[i] - step * grad;
    }
    std::vector<double> next = project_box_simplex(trial, prob.lower, prob.upper, prob.sum_target);
    double change = 0.0;
    for (std::size_t i = 0; i < prob.m; ++i) change = std::max(change, std::abs(next[i] - g[i]));
    g = std::move(next);
    sol.iterations = it + 1;
    if (change < 1e-10) break;
  }

  sol.gamma = std::move(g);
  sol.objective = dense_objective(prob, sol.gamma);
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

inline QpSolution solve_projected_gradient(const QpProblem& prob, std::size_t iters) {
  return solve_projected_gradient(prob, default_step(prob), iters);
}

}  // namespace ocssvm::qp
