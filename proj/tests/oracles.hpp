#pragma once

// Test-side reference computations. Written from the definitions, without
// calling into the library's kernel, score or rho code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "ocssvm/core_types.hpp"

namespace oracle {

using ocssvm::KernelKind;
using ocssvm::KernelSpec;
using ocssvm::Matrix;

inline double kernel(const KernelSpec& k, const double* x, const double* y, std::size_t d) {
  switch (k.kind) {
    case KernelKind::linear: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += x[i] * y[i];
      return s;
    }
    case KernelKind::rbf: {
      const double g = k.rbf_gamma ? *k.rbf_gamma : 1.0 / static_cast<double>(d);
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
      return std::exp(-g * s);
    }
    case KernelKind::polynomial: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += x[i] * y[i];
      return std::pow(s + k.poly_coef0, k.poly_degree);
    }
  }
  return 0.0;
}

inline std::vector<std::vector<double>> gram(const KernelSpec& k, const Matrix& x) {
  const std::size_t m = x.rows(), d = x.cols();
  std::vector<std::vector<double>> g(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) g[i][j] = kernel(k, x.row(i).data(), x.row(j).data(), d);
  return g;
}

inline std::vector<double> scores(const std::vector<std::vector<double>>& g, const std::vector<double>& gamma) {
  std::vector<double> s(gamma.size(), 0.0);
  for (std::size_t i = 0; i < gamma.size(); ++i)
    for (std::size_t j = 0; j < gamma.size(); ++j) s[i] += g[i][j] * gamma[j];
  return s;
}

inline double objective(const std::vector<std::vector<double>>& g, const std::vector<double>& gamma) {
  double total = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i)
    for (std::size_t j = 0; j < gamma.size(); ++j) total += gamma[i] * g[i][j] * gamma[j];
  return 0.5 * total;
}

struct Box {
  double lo, hi;
};

inline Box box_for(double nu1, double nu2, double eps, std::size_t m) {
  const double md = static_cast<double>(m);
  return {-eps / (nu2 * md), 1.0 / (nu1 * md)};
}

// Region codes: 0 zero, 1 strictly between lo and 0, 2 at lo, 3 strictly
// between 0 and hi, 4 at hi. cutoff is relative to the bound magnitude.
inline int region(double g, Box b, double cutoff = 1e-12) {
  if (std::abs(g) < 1e-12) return 0;
  if (g > 0) return g >= b.hi * (1.0 - cutoff) ? 4 : 3;
  return g <= b.lo * (1.0 - cutoff) ? 2 : 1;
}

struct Rhos {
  double rho1, rho2;
};

// Plane offsets: means over on-plane points; with none, the nearest score
// among saturated points, else the extreme score overall.
inline Rhos rhos(const std::vector<double>& gamma, const std::vector<double>& s, Box b, double cutoff = 1e-12) {
  double s1 = 0, s2 = 0;
  int n1 = 0, n2 = 0;
  double top_hi = -INFINITY, bot_lo = INFINITY, mn = INFINITY, mx = -INFINITY;
  bool any_hi = false, any_lo = false;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    mn = std::min(mn, s[i]);
    mx = std::max(mx, s[i]);
    switch (region(gamma[i], b, cutoff)) {
      case 3: s1 += s[i]; ++n1; break;
      case 1: s2 += s[i]; ++n2; break;
      case 4: any_hi = true; top_hi = std::max(top_hi, s[i]); break;
      case 2: any_lo = true; bot_lo = std::min(bot_lo, s[i]); break;
      default: break;
    }
  }
  Rhos r;
  r.rho1 = n1 ? s1 / n1 : (any_hi ? top_hi : mn);
  r.rho2 = n2 ? s2 / n2 : (any_lo ? bot_lo : mx);
  return r;
}

// Number of points whose slab position contradicts their gamma region by
// more than tol.
inline std::size_t five_case_violators(const std::vector<double>& gamma, const std::vector<double>& s, Box b,
                                       Rhos r, double tol) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    bool bad = false;
    switch (region(gamma[i], b)) {
      case 0: bad = s[i] < r.rho1 - tol || s[i] > r.rho2 + tol; break;
      case 1: bad = std::abs(s[i] - r.rho2) > tol; break;
      case 2: bad = s[i] < r.rho2 - tol; break;
      case 3: bad = std::abs(s[i] - r.rho1) > tol; break;
      case 4: bad = s[i] > r.rho1 + tol; break;
    }
    n += bad;
  }
  return n;
}

// -1 below the slab, 0 inside, +1 above.
inline int slab_side(double s, Rhos r) {
  if (s <= r.rho1) return -1;
  if (s >= r.rho2) return 1;
  return 0;
}

inline double mcc(double tp, double tn, double fp, double fn) {
  const double num = tp * tn - fp * fn;
  const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  return den == 0.0 ? 0.0 : num / den;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t m, std::size_t d, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix x(m, d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) x.row(i)[j] = u(rng);
  return x;
}

inline KernelSpec random_kernel(std::mt19937_64& rng, int which) {
  switch (which % 3) {
    case 0: return KernelSpec::linear();
    case 1: return KernelSpec::rbf(std::uniform_real_distribution<double>(0.2, 2.0)(rng));
    default: return KernelSpec::polynomial(std::uniform_int_distribution<int>(2, 3)(rng), 1.0);
  }
}

inline ocssvm::HyperParams random_params(std::mt19937_64& rng, KernelSpec k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ocssvm::HyperParams p;
  p.nu1 = 0.05 + 0.95 * u(rng);
  p.nu2 = 0.01 + 0.99 * u(rng);
  p.epsilon = 0.05 + 0.9 * u(rng);
  p.kernel = k;
  return p;
}

}  // namespace oracle
