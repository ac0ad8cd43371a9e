#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <functional>
#include <random>

#include "ocssvm/reference_qp.hpp"
#include "oracles.hpp"

using namespace ocssvm;
using namespace ocssvm::qp;

namespace {

QpProblem identity(std::size_t m, double lo, double hi, double target) {
  QpProblem p;
  p.m = m;
  p.gram.assign(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) p.gram[i * m + i] = 1.0;
  p.lower = lo;
  p.upper = hi;
  p.sum_target = target;
  return p;
}

QpProblem random_psd(std::mt19937_64& rng, std::size_t m, double lo, double hi, double target) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = n(rng);
  const Eigen::MatrixXd k = a * a.transpose() / static_cast<double>(m);
  QpProblem p;
  p.m = m;
  p.gram.resize(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) p.gram[i * m + j] = 0.5 * (k(i, j) + k(j, i));
  p.lower = lo;
  p.upper = hi;
  p.sum_target = target;
  return p;
}

// Exact projection by trying every assignment of coordinates to
// {lower, upper, free}; free coordinates share one shift.
std::vector<double> enumerate_projection(const std::vector<double>& v, double lo, double hi, double target) {
  const std::size_t m = v.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < m; ++i) combos *= 3;
  std::vector<double> best;
  double best_dist = INFINITY;
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<int> state(m);
    std::size_t code = c;
    for (std::size_t i = 0; i < m; ++i, code /= 3) state[i] = static_cast<int>(code % 3);
    double fixed = 0.0, free_sum = 0.0;
    std::size_t nfree = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (state[i] == 0) fixed += lo;
      if (state[i] == 1) fixed += hi;
      if (state[i] == 2) {
        free_sum += v[i];
        ++nfree;
      }
    }
    std::vector<double> x(m);
    if (nfree == 0) {
      if (std::abs(fixed - target) > 1e-12) continue;
    }
    const double shift = nfree ? (free_sum - (target - fixed)) / static_cast<double>(nfree) : 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = state[i] == 0 ? lo : state[i] == 1 ? hi : v[i] - shift;
      if (x[i] < lo - 1e-12 || x[i] > hi + 1e-12) ok = false;
    }
    if (!ok) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < m; ++i) dist += (x[i] - v[i]) * (x[i] - v[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

// Grid search over the first m-1 coordinates (the last is fixed by the sum
// constraint), refined around the best cell down to pitch 1e-3. The problem
// is convex, so refining near the coarse minimum is enough.
double grid_minimum(const QpProblem& p) {
  const std::size_t m = p.m, free = m - 1;
  std::vector<double> center(free, 0.5 * (p.lower + p.upper));
  double half = 0.5 * (p.upper - p.lower);
  double h = (p.upper - p.lower) / 10.0;
  double best = INFINITY;
  std::vector<double> best_point = center;
  std::vector<double> g(m);
  while (true) {
    const int steps = static_cast<int>(std::round(2.0 * half / h));
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double partial) {
      if (i == free) {
        g[free] = p.sum_target - partial;
        if (g[free] < p.lower - 1e-12 || g[free] > p.upper + 1e-12) return;
        const double f = dense_objective(p, g);
        if (f < best) {
          best = f;
          best_point.assign(g.begin(), g.begin() + static_cast<long>(free));
        }
        return;
      }
      for (int s = 0; s <= steps; ++s) {
        const double v = center[i] - half + h * s;
        if (v < p.lower - 1e-12 || v > p.upper + 1e-12) continue;
        g[i] = v;
        rec(i + 1, partial + v);
      }
    };
    rec(0, 0.0);
    if (h <= 1e-3) break;
    center = best_point;
    half = h;
    h = std::max(h / 4.0, 1e-3);
  }
  return best;
}

}  // namespace

TEST(Projection, HandExamples) {
  const std::vector<double> v{10.0, 10.0};
  const auto x = project_box_simplex(v, 0.0, 0.3, 0.5);
  EXPECT_NEAR(x[0], 0.25, 1e-12);
  EXPECT_NEAR(x[1], 0.25, 1e-12);

  const std::vector<double> feasible{0.1, 0.2, 0.2};
  EXPECT_EQ(project_box_simplex(feasible, 0.0, 0.3, 0.5), feasible);
}

TEST(Projection, RejectsEmptySet) {
  const std::vector<double> v{0.0, 0.0};
  EXPECT_THROW(project_box_simplex(v, 0.0, 0.2, 0.5), Infeasible);
  EXPECT_THROW(project_box_simplex(v, 0.3, 0.4, 0.5), Infeasible);
}

TEST(Projection, MatchesEnumerationOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t m = 1 + rng() % 4;
    const double lo = -w(rng), hi = w(rng) + 0.01;
    const double md = static_cast<double>(m);
    const double target = md * lo + w(rng) * md * (hi - lo);
    std::vector<double> v(m);
    for (double& x : v) x = u(rng);
    const auto got = project_box_simplex(v, lo, hi, target);
    const auto want = enumerate_projection(v, lo, hi, target);
    ASSERT_EQ(want.size(), m);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(got[i], want[i], 1e-10) << "trial " << t;
  }
}

TEST(Projection, IsIdempotentBitForBit) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t m = 1 + rng() % 50;
    std::vector<double> v(m);
    for (double& x : v) x = u(rng);
    const double md = static_cast<double>(m);
    const auto once = project_box_simplex(v, -0.5, 0.5, 0.1 * md);
    const auto twice = project_box_simplex(once, -0.5, 0.5, 0.1 * md);
    ASSERT_EQ(once, twice);
  }
}

TEST(DenseObjective, Examples) {
  const QpProblem p = identity(2, -1.0, 1.0, 0.5);
  const std::vector<double> zero{0.0, 0.0}, g{0.25, 0.25};
  EXPECT_EQ(dense_objective(p, zero), 0.0);
  EXPECT_DOUBLE_EQ(dense_objective(p, g), 0.0625);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(dense_objective(p, bad), DimensionMismatch);
}

TEST(DenseObjective, MatchesEigenQuadraticForm) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 1 + rng() % 12;
    const QpProblem p = random_psd(rng, m, -1.0, 1.0, 0.0);
    Eigen::MatrixXd k(m, m);
    Eigen::VectorXd g(m);
    std::vector<double> gv(m);
    for (std::size_t i = 0; i < m; ++i) {
      gv[i] = g(i) = u(rng);
      for (std::size_t j = 0; j < m; ++j) k(i, j) = p.k(i, j);
    }
    EXPECT_NEAR(dense_objective(p, gv), 0.5 * g.dot(k * g), 1e-12);
  }
}

TEST(ProjectedGradient, IdentityTwoPoint) {
  const QpSolution s = solve_projected_gradient(identity(2, -0.5, 0.5, 0.5), 1000);
  EXPECT_NEAR(s.gamma[0], 0.25, 1e-12);
  EXPECT_NEAR(s.gamma[1], 0.25, 1e-12);
  EXPECT_GE(s.seconds, 0.0);
}

TEST(ProjectedGradient, ZeroGramGivesFeasiblePoint) {
  QpProblem p = identity(5, -0.1, 0.4, 1.0);
  std::fill(p.gram.begin(), p.gram.end(), 0.0);
  const QpSolution s = solve_projected_gradient(p, 100);
  double sum = 0.0;
  for (double g : s.gamma) {
    EXPECT_GE(g, -0.1);
    EXPECT_LE(g, 0.4);
    sum += g;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(s.objective, 0.0);
}

TEST(ProjectedGradient, NotWorseThanGridSearch) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 3; ++t) {
    const QpProblem p = random_psd(rng, 6, -0.1, 0.3, 0.5);
    const QpSolution s = solve_projected_gradient(p, 200000);
    EXPECT_LE(s.objective, grid_minimum(p) + 1e-3);
  }
}

TEST(ProblemSetup, BuildsGramAndBounds) {
  const Matrix x(3, 1, {1.0, 2.0, 3.0});
  HyperParams hp;
  const QpProblem p = make_problem(x, hp);
  EXPECT_EQ(p.k(1, 2), 6.0);
  EXPECT_DOUBLE_EQ(p.upper, 1.0 / 1.5);
  EXPECT_DOUBLE_EQ(p.lower, -(2.0 / 3.0) / 0.03);
  EXPECT_DOUBLE_EQ(p.sum_target, 1.0 / 3.0);
}

TEST(ProblemSetup, RejectsBadInstances) {
  QpProblem p = identity(2, -1.0, 1.0, 0.5);
  p.gram[1] = 0.3;
  EXPECT_THROW(p.validate(), Error);
  EXPECT_THROW(identity(2, 0.0, 0.1, 0.5).validate(), Infeasible);
  EXPECT_THROW(solve_projected_gradient(identity(2, -1, 1, 0.5), 0.0, 10), Error);
}
