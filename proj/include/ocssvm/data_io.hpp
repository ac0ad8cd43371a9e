#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ocssvm/core_types.hpp"

namespace ocssvm::io {

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Whole-token double parse; false on any leftover characters.
inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
inline bool parse_int(std::string_view s, Int& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw IoError("write to '" + path + "' failed");
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

struct CsvOptions {
  bool has_labels = false;  // last column is a +1 / -1 label
  bool skip_header = false;
};

// Comma-separated rows; blank lines are ignored. Rows and columns in errors
// are 1-based.
inline Dataset parse_csv(std::string_view text, CsvOptions opts = {}) {
  Dataset ds;
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t row_no = 0;
  bool header_skipped = !opts.skip_header;
  std::vector<double> values;

  for (std::string_view line : detail::split(text, '\n')) {
    line = detail::trim(line);
    if (line.empty()) continue;
    if (!header_skipped) {
      header_skipped = true;
      std::vector<std::string> names;
      for (auto cell : detail::split(line, ',')) names.emplace_back(detail::trim(cell));
      if (opts.has_labels && !names.empty()) names.pop_back();
      ds.feature_names = std::move(names);
      continue;
    }
    ++row_no;
    const auto cells = detail::split(line, ',');
    if (width == 0) {
      width = cells.size();
      if (opts.has_labels && width < 2)
        throw ParseError(row_no, 1, "a labelled row needs at least one feature");
    } else if (cells.size() != width) {
      throw RaggedRows("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                       " columns, expected " + std::to_string(width));
    }

    const std::size_t n_features = opts.has_labels ? width - 1 : width;
    values.assign(n_features, 0.0);
    for (std::size_t c = 0; c < n_features; ++c) {
      const auto cell = detail::trim(cells[c]);
      double v = 0.0;
      if (!detail::parse_double(cell, v))
        throw ParseError(row_no, c + 1, "'" + std::string(cell) + "' is not a number");
      if (!std::isfinite(v))
        throw NonFiniteValue("non-finite value at row " + std::to_string(row_no) + " col " +
                             std::to_string(c + 1));
      values[c] = v;
    }
    ds.features.append_row(values);

    if (opts.has_labels) {
      const auto cell = detail::trim(cells.back());
      int y = 0;
      if (!detail::parse_int(cell, y) || (y != 1 && y != -1))
        throw ParseError(row_no, width, "label '" + std::string(cell) + "' is not +1 or -1");
      labels.push_back(y);
    }
  }
  if (opts.has_labels) ds.labels = std::move(labels);
  return ds;
}

inline Dataset load_csv(const std::string& path, CsvOptions opts = {}) {
  return parse_csv(detail::read_file(path), opts);
}

inline std::string format_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = ds.features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += detail::format_double(row[j]);
    }
    if (ds.labels) out += (*ds.labels)[i] > 0 ? ",+1" : ",-1";
    out += '\n';
  }
  return out;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  detail::write_file(path, format_csv(ds));
}

// "label idx:val idx:val ..." with 1-based strictly ascending indices.
// Positive labels map to +1, everything else to -1. '#' starts a comment.
inline Dataset parse_libsvm(std::string_view text) {
  struct Row {
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Row> rows;
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t row_no = 0;

  for (std::string_view line : detail::split(text, '\n')) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    ++row_no;
    const auto toks = detail::tokens(line);
    double label = 0.0;
    if (!detail::parse_double(toks[0], label) || !std::isfinite(label))
      throw ParseError(row_no, 1, "bad label '" + std::string(toks[0]) + "'");
    labels.push_back(label > 0 ? 1 : -1);

    Row r;
    std::size_t prev = 0;
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const auto colon = toks[t].find(':');
      if (colon == std::string_view::npos)
        throw ParseError(row_no, t + 1, "expected idx:val, got '" + std::string(toks[t]) + "'");
      std::size_t idx = 0;
      double v = 0.0;
      if (!detail::parse_int(toks[t].substr(0, colon), idx) || idx == 0)
        throw ParseError(row_no, t + 1, "bad feature index in '" + std::string(toks[t]) + "'");
      if (!detail::parse_double(toks[t].substr(colon + 1), v))
        throw ParseError(row_no, t + 1, "bad feature value in '" + std::string(toks[t]) + "'");
      if (!std::isfinite(v))
        throw NonFiniteValue("non-finite value at row " + std::to_string(row_no) + " token " +
                             std::to_string(t + 1));
      if (idx <= prev)
        throw NonAscendingIndex("row " + std::to_string(row_no) + ": index " + std::to_string(idx) +
                                " follows " + std::to_string(prev));
      prev = idx;
      width = std::max(width, idx);
      r.entries.emplace_back(idx, v);
    }
    rows.push_back(std::move(r));
  }

  Dataset ds;
  ds.features = Matrix(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [idx, v] : rows[i].entries) ds.features(i, idx - 1) = v;
  ds.labels = std::move(labels);
  return ds;
}

inline Dataset load_libsvm(const std::string& path) { return parse_libsvm(detail::read_file(path)); }

// Synthetic one-class data: an isotropic Gaussian blob of inliers (+1) and
// uniform outliers (-1) in a box.
struct ToyDataSpec {
  std::size_t n_inliers = 900;
  std::size_t n_outliers = 100;
  std::size_t dim = 2;
  std::vector<double> inlier_center = {0.5, 0.5};
  double inlier_spread = 0.15;
  double outlier_low = 0.0;
  double outlier_high = 1.0;
  std::uint64_t seed = 7;

  // Same composition ratio, n points in total.
  ToyDataSpec with_total(std::size_t n) const {
    ToyDataSpec s = *this;
    const double frac =
        static_cast<double>(n_outliers) / static_cast<double>(std::max<std::size_t>(1, n_inliers + n_outliers));
    s.n_outliers = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    s.n_inliers = n - s.n_outliers;
    return s;
  }

  void validate() const {
    if (n_inliers + n_outliers < 2) throw InvalidRange("toy data needs at least 2 points");
    if (dim == 0) throw InvalidRange("toy data dimension must be positive");
    if (!(inlier_spread > 0.0)) throw InvalidRange("inlier spread must be > 0");
    if (!(outlier_low < outlier_high)) throw InvalidRange("outlier box needs low < high");
    if (inlier_center.size() != dim)
      throw InvalidRange("inlier center has " + std::to_string(inlier_center.size()) +
                         " coordinates, expected " + std::to_string(dim));
  }
};

inline Dataset generate_toy(const ToyDataSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.inlier_spread);
  std::uniform_real_distribution<double> uniform(spec.outlier_low, spec.outlier_high);

  const std::size_t n = spec.n_inliers + spec.n_outliers;
  Matrix raw(n, spec.dim);
  std::vector<int> raw_labels(n);
  for (std::size_t i = 0; i < spec.n_inliers; ++i) {
    for (std::size_t k = 0; k < spec.dim; ++k) raw(i, k) = spec.inlier_center[k] + normal(rng);
    raw_labels[i] = 1;
  }
  for (std::size_t i = spec.n_inliers; i < n; ++i) {
    for (std::size_t k = 0; k < spec.dim; ++k) raw(i, k) = uniform(rng);
    raw_labels[i] = -1;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Dataset ds;
  ds.features = Matrix(n, spec.dim);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = raw.row(order[i]);
    std::copy(src.begin(), src.end(), ds.features.row(i).begin());
    labels[i] = raw_labels[order[i]];
  }
  ds.labels = std::move(labels);
  return ds;
}

// ---------------------------------------------------------------------------
// Model file: line-oriented text, version on the first line, every double in
// shortest round-trip decimal form, FNV-1a 64 checksum of all preceding bytes
// on the last line.

inline constexpr int kModelVersion = 1;

inline std::string serialize_model(const TrainedModel& model) {
  using detail::format_double;
  std::ostringstream os;
  os << "ocssvm-model " << kModelVersion << '\n';
  os << "kernel " << to_string(model.kernel.kind);
  if (model.kernel.kind == KernelKind::rbf)
    os << ' ' << format_double(model.kernel.rbf_gamma.value_or(1.0));
  if (model.kernel.kind == KernelKind::polynomial)
    os << ' ' << model.kernel.poly_degree << ' ' << format_double(model.kernel.poly_coef0);
  os << '\n';
  const HyperParams& p = model.params;
  os << "nu1 " << format_double(p.nu1) << '\n';
  os << "nu2 " << format_double(p.nu2) << '\n';
  os << "epsilon " << format_double(p.epsilon) << '\n';
  os << "tol " << format_double(p.tol) << '\n';
  os << "max_iter " << (p.max_iter ? std::to_string(*p.max_iter) : std::string("auto")) << '\n';
  os << "seed " << p.seed << '\n';
  os << "dim " << model.dim << '\n';
  os << "train_size " << model.train_size << '\n';
  os << "rho1 " << format_double(model.rho1) << '\n';
  os << "rho2 " << format_double(model.rho2) << '\n';
  os << "iterations " << model.meta.iterations << '\n';
  os << "max_violation " << format_double(model.meta.max_violation) << '\n';
  os << "wall_seconds " << format_double(model.meta.wall_seconds) << '\n';
  os << "status " << to_string(model.meta.status) << '\n';
  os << "support_vectors " << model.support_vectors.size() << '\n';
  for (const SupportVector& sv : model.support_vectors) {
    os << "sv " << format_double(sv.gamma);
    for (double x : sv.x) os << ' ' << format_double(x);
    os << '\n';
  }
  std::string body = os.str();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(body)));
  body += "checksum ";
  body += hex;
  body += '\n';
  return body;
}

inline TrainedModel deserialize_model(std::string_view text) {
  const std::size_t first_nl = text.find('\n');
  {
    const auto head = detail::tokens(text.substr(0, first_nl));
    if (head.size() != 2 || head[0] != "ocssvm-model") throw CorruptModel("not an ocssvm model file");
    int version = 0;
    if (!detail::parse_int(head[1], version)) throw CorruptModel("unreadable version tag");
    if (version != kModelVersion)
      throw VersionMismatch("model version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kModelVersion) + ")");
  }

  const std::size_t ck = text.rfind("checksum ");
  if (ck == std::string_view::npos || (ck > 0 && text[ck - 1] != '\n'))
    throw CorruptModel("checksum line missing (truncated file?)");
  {
    const auto toks = detail::tokens(detail::trim(text.substr(ck)));
    std::uint64_t stored = 0;
    if (toks.size() != 2) throw CorruptModel("malformed checksum line");
    const auto [ptr, ec] =
        std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), stored, 16);
    if (ec != std::errc() || ptr != toks[1].data() + toks[1].size())
      throw CorruptModel("malformed checksum line");
    if (stored != detail::fnv1a(text.substr(0, ck))) throw CorruptModel("checksum mismatch");
  }

  std::vector<std::vector<std::string_view>> lines;
  for (std::string_view line : detail::split(text.substr(first_nl + 1, ck - first_nl - 1), '\n')) {
    auto toks = detail::tokens(line);
    if (!toks.empty()) lines.push_back(std::move(toks));
  }

  std::size_t cursor = 0;
  const auto expect = [&](std::string_view key, std::size_t min_args) -> const std::vector<std::string_view>& {
    if (cursor >= lines.size() || lines[cursor][0] != key || lines[cursor].size() < min_args + 1)
      throw CorruptModel("expected field '" + std::string(key) + "'");
    return lines[cursor++];
  };
  const auto num = [](std::string_view s) {
    double v = 0.0;
    if (!detail::parse_double(s, v)) throw CorruptModel("bad number '" + std::string(s) + "'");
    return v;
  };
  const auto count = [](std::string_view s) {
    std::uint64_t v = 0;
    if (!detail::parse_int(s, v)) throw CorruptModel("bad integer '" + std::string(s) + "'");
    return v;
  };

  TrainedModel model;
  {
    const auto& k = expect("kernel", 1);
    const KernelKind kind = [&] {
      try {
        return parse_kernel_kind(std::string(k[1]));
      } catch (const InvalidRange&) {
        throw CorruptModel("unknown kernel in model file");
      }
    }();
    if (kind == KernelKind::linear) model.kernel = KernelSpec::linear();
    if (kind == KernelKind::rbf) {
      if (k.size() != 3) throw CorruptModel("rbf kernel needs gamma");
      model.kernel = KernelSpec::rbf(num(k[2]));
    }
    if (kind == KernelKind::polynomial) {
      if (k.size() != 4) throw CorruptModel("polynomial kernel needs degree and coef0");
      model.kernel = KernelSpec::polynomial(static_cast<int>(count(k[2])), num(k[3]));
    }
  }
  HyperParams& p = model.params;
  p.kernel = model.kernel;
  p.nu1 = num(expect("nu1", 1)[1]);
  p.nu2 = num(expect("nu2", 1)[1]);
  p.epsilon = num(expect("epsilon", 1)[1]);
  p.tol = num(expect("tol", 1)[1]);
  {
    const auto& mi = expect("max_iter", 1);
    if (mi[1] != "auto") p.max_iter = count(mi[1]);
  }
  p.seed = count(expect("seed", 1)[1]);
  model.dim = count(expect("dim", 1)[1]);
  model.train_size = count(expect("train_size", 1)[1]);
  model.rho1 = num(expect("rho1", 1)[1]);
  model.rho2 = num(expect("rho2", 1)[1]);
  model.meta.iterations = count(expect("iterations", 1)[1]);
  model.meta.max_violation = num(expect("max_violation", 1)[1]);
  model.meta.wall_seconds = num(expect("wall_seconds", 1)[1]);
  {
    const auto s = expect("status", 1)[1];
    if (s == "converged")
      model.meta.status = TrainStatus::converged;
    else if (s == "max_iter")
      model.meta.status = TrainStatus::max_iter_reached;
    else if (s == "no_progress")
      model.meta.status = TrainStatus::no_progress;
    else
      throw CorruptModel("unknown status '" + std::string(s) + "'");
  }
  const std::size_t n_sv = count(expect("support_vectors", 1)[1]);
  model.support_vectors.reserve(n_sv);
  for (std::size_t i = 0; i < n_sv; ++i) {
    const auto& sv = expect("sv", 1);
    if (sv.size() != model.dim + 2) throw CorruptModel("support vector has wrong dimension");
    SupportVector v;
    v.gamma = num(sv[1]);
    v.x.reserve(model.dim);
    for (std::size_t k = 0; k < model.dim; ++k) v.x.push_back(num(sv[k + 2]));
    model.support_vectors.push_back(std::move(v));
  }
  if (cursor != lines.size()) throw CorruptModel("unexpected trailing fields");
  return model;
}

inline void save_model(const TrainedModel& model, const std::string& path) {
  detail::write_file(path, serialize_model(model));
}

inline TrainedModel load_model(const std::string& path) {
  return deserialize_model(detail::read_file(path));
}

}  // namespace ocssvm::io
