#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocssvm/errors.hpp"

namespace ocssvm {

// Dense row-major matrix of features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionMismatch("matrix storage does not match its shape");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const noexcept { return data_; }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DimensionMismatch("row has wrong dimension");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class KernelKind { linear, rbf, polynomial };

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::linear:
      return "linear";
    case KernelKind::rbf:
      return "rbf";
    case KernelKind::polynomial:
      return "polynomial";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  if (name == "polynomial" || name == "poly") return KernelKind::polynomial;
  throw InvalidRange("unknown kernel '" + name + "'");
}

// Kernel choice. Use the factories so that only the parameters the kind
// needs are set.
struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  // rbf only; nullopt resolves to 1/d once the data dimension is known.
  std::optional<double> rbf_gamma;
  // polynomial only.
  int poly_degree = 0;
  double poly_coef0 = 0.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec rbf(std::optional<double> gamma = std::nullopt) {
    KernelSpec k;
    k.kind = KernelKind::rbf;
    k.rbf_gamma = gamma;
    return k;
  }
  static KernelSpec polynomial(int degree, double coef0) {
    KernelSpec k;
    k.kind = KernelKind::polynomial;
    k.poly_degree = degree;
    k.poly_coef0 = coef0;
    return k;
  }

  // Fills in data-dependent defaults.
  KernelSpec resolved(std::size_t dim) const {
    KernelSpec k = *this;
    if (k.kind == KernelKind::rbf && !k.rbf_gamma)
      k.rbf_gamma = dim > 0 ? 1.0 / static_cast<double>(dim) : 1.0;
    return k;
  }

  void validate() const {
    switch (kind) {
      case KernelKind::linear:
        if (rbf_gamma || poly_degree != 0 || poly_coef0 != 0.0)
          throw InvalidRange("linear kernel takes no parameters");
        break;
      case KernelKind::rbf:
        if (rbf_gamma && !(*rbf_gamma > 0.0 && std::isfinite(*rbf_gamma)))
          throw InvalidRange("rbf gamma must be > 0");
        if (poly_degree != 0 || poly_coef0 != 0.0)
          throw InvalidRange("rbf kernel takes no polynomial parameters");
        break;
      case KernelKind::polynomial:
        if (poly_degree < 1) throw InvalidRange("polynomial degree must be >= 1");
        if (!std::isfinite(poly_coef0)) throw InvalidRange("polynomial coef0 must be finite");
        if (rbf_gamma) throw InvalidRange("polynomial kernel takes no rbf gamma");
        break;
    }
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct HyperParams {
  double nu1 = 0.5;
  double nu2 = 0.01;
  double epsilon = 2.0 / 3.0;
  KernelSpec kernel = KernelSpec::linear();
  double tol = 1e-3;
  // nullopt means 100 * m.
  std::optional<std::size_t> max_iter;
  std::uint64_t seed = 0;

  std::size_t iteration_cap(std::size_t m) const { return max_iter.value_or(100 * m); }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// The gamma-space feasible set: lower <= g_i <= upper, sum g_i = sum_target.
struct GammaBox {
  double lower = 0.0;
  double upper = 0.0;
  double sum_target = 0.0;

  // Bound identification uses a relative cutoff of 1e-12.
  bool at_upper(double g) const { return g >= upper - 1e-12 * std::abs(upper); }
  bool at_lower(double g) const { return g <= lower + 1e-12 * std::abs(lower); }
  // May still increase / decrease.
  bool can_increase(double g) const { return !at_upper(g); }
  bool can_decrease(double g) const { return !at_lower(g); }
};

inline GammaBox gamma_box(const HyperParams& p, std::size_t m) {
  const double md = static_cast<double>(m);
  return {-p.epsilon / (p.nu2 * md), 1.0 / (p.nu1 * md), 1.0 - p.epsilon};
}

// |g| below this is exactly zero for support-vector identification.
inline constexpr double kZeroGamma = 1e-12;

inline bool is_zero_gamma(double g) { return std::abs(g) < kZeroGamma; }

// Range checks plus feasibility of the box-and-sum system for m samples.
inline HyperParams validate_params(const HyperParams& p, std::size_t m) {
  if (!(p.nu1 > 0.0 && p.nu1 <= 1.0))
    throw InvalidRange("nu1 must be in (0, 1], got " + std::to_string(p.nu1));
  if (!(p.nu2 > 0.0 && p.nu2 <= 1.0))
    throw InvalidRange("nu2 must be in (0, 1], got " + std::to_string(p.nu2));
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0))
    throw InvalidRange("epsilon must be in (0, 1), got " + std::to_string(p.epsilon));
  if (!(p.tol > 0.0 && std::isfinite(p.tol)))
    throw InvalidRange("tol must be > 0, got " + std::to_string(p.tol));
  if (p.max_iter && *p.max_iter == 0) throw InvalidRange("max_iter must be positive");
  p.kernel.validate();
  if (m < 2) throw InvalidRange("at least 2 samples are required");

  // Sum of the upper bounds is 1/nu1, sum of the lower bounds is -eps/nu2.
  const double target = 1.0 - p.epsilon;
  if (!(1.0 / p.nu1 >= target))
    throw InfeasibleParams("infeasible: 1/nu1 >= 1 - epsilon does not hold");
  if (!(-p.epsilon / p.nu2 <= target))
    throw InfeasibleParams("infeasible: -epsilon/nu2 <= 1 - epsilon does not hold");
  return p;
}

// Uniform split of the sum target, clipped into the box with the deficit
// pushed greedily onto coordinates that still have room.
inline std::vector<double> feasible_start(const GammaBox& box, std::size_t m) {
  if (m == 0 || box.lower > box.upper ||
      box.lower * static_cast<double>(m) > box.sum_target + 1e-12 ||
      box.upper * static_cast<double>(m) < box.sum_target - 1e-12)
    throw InfeasibleParams("box and sum constraints have no common point");

  std::vector<double> g(m, box.sum_target / static_cast<double>(m));
  for (double& v : g) v = std::clamp(v, box.lower, box.upper);

  for (int pass = 0; pass < 64; ++pass) {
    double sum = 0.0;
    for (double v : g) sum += v;
    const double deficit = box.sum_target - sum;
    if (std::abs(deficit) <= 1e-15 * std::max(1.0, std::abs(box.sum_target))) break;

    std::size_t open = 0;
    for (double v : g)
      if (deficit > 0 ? v < box.upper : v > box.lower) ++open;
    if (open == 0) break;

    const double share = deficit / static_cast<double>(open);
    for (double& v : g) {
      if (deficit > 0 && v < box.upper)
        v = std::min(box.upper, v + share);
      else if (deficit < 0 && v > box.lower)
        v = std::max(box.lower, v + share);
    }
  }
  return g;
}

// Dual vector g = alpha - alpha_bar plus the cached expansion scores
// scores[i] = sum_j g_j k(x_i, x_j).
struct GammaState {
  std::vector<double> gamma;
  std::vector<double> scores;
  double rho1 = 0.0;
  double rho2 = 0.0;
};

struct Dataset {
  Matrix features;
  std::optional<std::vector<int>> labels;  // +1 / -1, evaluation only
  std::optional<std::vector<std::string>> feature_names;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }

  void validate() const {
    if (features.rows() < 2) throw DataError("a dataset needs at least 2 rows");
    if (labels && labels->size() != features.rows())
      throw DimensionMismatch("label count does not match row count");
    if (labels)
      for (int y : *labels)
        if (y != 1 && y != -1) throw DataError("labels must be +1 or -1");
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class TrainStatus { converged, max_iter_reached, no_progress };

inline std::string to_string(TrainStatus s) {
  switch (s) {
    case TrainStatus::converged:
      return "converged";
    case TrainStatus::max_iter_reached:
      return "max_iter";
    case TrainStatus::no_progress:
      return "no_progress";
  }
  return "unknown";
}

struct TrainMeta {
  std::size_t iterations = 0;
  double max_violation = 0.0;
  double wall_seconds = 0.0;
  TrainStatus status = TrainStatus::converged;

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct SupportVector {
  std::vector<double> x;
  double gamma = 0.0;

  friend bool operator==(const SupportVector&, const SupportVector&) = default;
};

// Immutable inference artifact.
struct TrainedModel {
  std::vector<SupportVector> support_vectors;
  double rho1 = 0.0;
  double rho2 = 0.0;
  KernelSpec kernel;  // resolved
  HyperParams params;
  std::size_t dim = 0;
  std::size_t train_size = 0;
  TrainMeta meta;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

}  // namespace ocssvm
