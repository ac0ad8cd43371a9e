#pragma once

#include <cmath>
#include <cstddef>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "ocssvm/core_types.hpp"

namespace ocssvm {

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

// k(x, y) for a resolved spec. Dimensions are assumed equal.
inline double kernel_value(const KernelSpec& spec, std::span<const double> x,
                           std::span<const double> y) {
  switch (spec.kind) {
    case KernelKind::linear:
      return dot(x, y);
    case KernelKind::rbf: {
      double d2 = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        d2 += diff * diff;
      }
      return std::exp(-spec.rbf_gamma.value_or(1.0) * d2);
    }
    case KernelKind::polynomial: {
      const double base = dot(x, y) + spec.poly_coef0;
      double r = 1.0;
      for (int p = 0; p < spec.poly_degree; ++p) r *= base;
      return r;
    }
  }
  return 0.0;
}

// Kernel evaluation over a training matrix with an LRU cache of full rows.
//
// Cached entries are produced by the same kernel_value call as eval(), so a
// cache hit is bit-identical to a fresh evaluation. The cache is not
// synchronized: give each thread its own engine.
class KernelEngine {
 public:
  KernelEngine(KernelSpec spec, const Matrix& data, std::size_t cache_rows = 0)
      : spec_(spec.resolved(data.cols())),
        data_(&data),
        capacity_(cache_rows == 0 ? std::min<std::size_t>(data.rows(), 512) : cache_rows) {
    spec_.validate();
    diag_.resize(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i)
      diag_[i] = kernel_value(spec_, data.row(i), data.row(i));
  }

  const KernelSpec& spec() const noexcept { return spec_; }
  const Matrix& data() const noexcept { return *data_; }
  std::size_t size() const noexcept { return data_->rows(); }
  std::size_t dim() const noexcept { return data_->cols(); }
  std::size_t cache_capacity() const noexcept { return capacity_; }
  std::size_t cached_rows() const noexcept { return rows_.size(); }

  double eval(std::size_t i, std::size_t j) const {
    check(i);
    check(j);
    if (i == j) return diag_[i];
    return kernel_value(spec_, data_->row(i), data_->row(j));
  }

  double diag(std::size_t i) const {
    check(i);
    return diag_[i];
  }

  // Full row i; the returned reference stays valid until the next row() call.
  const std::vector<double>& row(std::size_t i) {
    check(i);
    if (auto it = rows_.find(i); it != rows_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.pos);
      return it->second.values;
    }
    if (rows_.size() >= capacity_) {
      rows_.erase(lru_.back());
      lru_.pop_back();
    }
    std::vector<double> values(size());
    for (std::size_t j = 0; j < size(); ++j) values[j] = eval(i, j);
    lru_.push_front(i);
    auto [it, inserted] = rows_.emplace(i, Entry{std::move(values), lru_.begin()});
    return it->second.values;
  }

  // sum_i gamma_i k(x_i, x), summed left to right.
  double expansion_score(std::span<const double> gamma, std::span<const double> x) const {
    if (gamma.size() != size()) throw DimensionMismatch("gamma length differs from sample count");
    if (x.size() != dim()) throw DimensionMismatch("query point has wrong dimension");
    double s = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      if (gamma[i] == 0.0) continue;
      s += gamma[i] * kernel_value(spec_, data_->row(i), x);
    }
    return s;
  }

  // scores[i] = sum_j gamma_j k(x_i, x_j) for every training row.
  std::vector<double> all_scores(std::span<const double> gamma) const {
    if (gamma.size() != size()) throw DimensionMismatch("gamma length differs from sample count");
    std::vector<double> scores(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < size(); ++j) {
        if (gamma[j] == 0.0) continue;
        s += gamma[j] * eval(i, j);
      }
      scores[i] = s;
    }
    return scores;
  }

 private:
  struct Entry {
    std::vector<double> values;
    std::list<std::size_t>::iterator pos;
  };

  void check(std::size_t i) const {
    if (i >= size()) throw IndexOutOfRange("kernel index " + std::to_string(i) + " out of range");
  }

  KernelSpec spec_;
  const Matrix* data_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, Entry> rows_;
};

}  // namespace ocssvm
