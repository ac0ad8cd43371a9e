#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage or flag error,
// 3 data error, 4 internal or training error.

#include <CLI11.hpp>

#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ocssvm/core_types.hpp"
#include "ocssvm/data_io.hpp"
#include "ocssvm/eval_bench.hpp"
#include "ocssvm/smo_solver.hpp"

namespace ocssvm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

struct ParamFlags {
  double nu1 = 0.5;
  double nu2 = 0.01;
  double epsilon = 2.0 / 3.0;
  std::string kernel = "linear";
  double rbf_gamma = 0.0;  // 0: 1/d
  int degree = 3;
  double coef0 = 1.0;
  double tol = 1e-3;
  std::size_t max_iter = 0;  // 0: 100 m
  std::uint64_t seed = 0;
  std::size_t cache_rows = 0;

  void add_to(CLI::App& app) {
    app.add_option("--nu1", nu1, "upper bound on the fraction below the lower plane, in (0,1]")
        ->capture_default_str();
    app.add_option("--nu2", nu2, "upper bound on the fraction above the upper plane, in (0,1]")
        ->capture_default_str();
    app.add_option("--epsilon", epsilon, "upper-plane slack weight, in (0,1)")->capture_default_str();
    app.add_option("--kernel", kernel, "linear | rbf | polynomial")->capture_default_str();
    app.add_option("--rbf-gamma", rbf_gamma, "rbf width (default 1/d)");
    app.add_option("--degree", degree, "polynomial degree")->capture_default_str();
    app.add_option("--coef0", coef0, "polynomial offset")->capture_default_str();
    app.add_option("--tol", tol, "KKT tolerance")->capture_default_str();
    app.add_option("--max-iter", max_iter, "iteration cap (default 100 m)");
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--cache-rows", cache_rows, "kernel row cache size (default min(m,512))");
  }

  HyperParams params() const {
    HyperParams p;
    p.nu1 = nu1;
    p.nu2 = nu2;
    p.epsilon = epsilon;
    switch (parse_kernel_kind(kernel)) {
      case KernelKind::linear:
        p.kernel = KernelSpec::linear();
        break;
      case KernelKind::rbf:
        p.kernel = KernelSpec::rbf(rbf_gamma > 0.0 ? std::optional<double>(rbf_gamma) : std::nullopt);
        if (rbf_gamma < 0.0) throw InvalidRange("rbf gamma must be > 0");
        break;
      case KernelKind::polynomial:
        p.kernel = KernelSpec::polynomial(degree, coef0);
        break;
    }
    p.tol = tol;
    if (max_iter > 0) p.max_iter = max_iter;
    p.seed = seed;
    // Range checks that do not depend on m; m = 2 is the smallest legal size.
    validate_params(p, 2);
    return p;
  }
};

struct DataFlags {
  std::string input;
  std::string format = "csv";
  bool labels = false;
  bool skip_header = false;

  void add_to(CLI::App& app, bool required = true) {
    auto* opt = app.add_option("--input,-i", input, "dataset path");
    if (required) opt->required();
    app.add_option("--format", format, "csv | libsvm")->capture_default_str();
    app.add_flag("--labels", labels, "csv: last column is a +1/-1 label");
    app.add_flag("--skip-header", skip_header, "csv: skip the first line");
  }

  Dataset load() const {
    if (format == "csv") return io::load_csv(input, {labels, skip_header});
    if (format == "libsvm") return io::load_libsvm(input);
    throw InvalidRange("unknown format '" + format + "'");
  }
};

struct ToyFlags {
  std::size_t n = 1000;
  double outlier_fraction = 0.1;
  std::size_t dim = 2;
  std::vector<double> center;
  double spread = 0.15;
  double box_low = 0.0;
  double box_high = 1.0;
  std::uint64_t seed = 7;

  void add_to(CLI::App& app, bool with_n) {
    if (with_n) app.add_option("--n", n, "total number of points")->capture_default_str();
    app.add_option("--outlier-fraction", outlier_fraction, "fraction of uniform outliers")
        ->capture_default_str();
    app.add_option("--dim", dim, "feature dimension")->capture_default_str();
    app.add_option("--center", center, "inlier center (default 0.5 in every coordinate)")->delimiter(',');
    app.add_option("--spread", spread, "inlier standard deviation")->capture_default_str();
    app.add_option("--box-low", box_low, "outlier box lower edge")->capture_default_str();
    app.add_option("--box-high", box_high, "outlier box upper edge")->capture_default_str();
    app.add_option("--data-seed", seed, "generator seed")->capture_default_str();
  }

  io::ToyDataSpec spec() const {
    if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0))
      throw InvalidRange("outlier fraction must be in [0, 1]");
    io::ToyDataSpec s;
    s.dim = dim;
    s.inlier_center = center.empty() ? std::vector<double>(dim, 0.5) : center;
    s.inlier_spread = spread;
    s.outlier_low = box_low;
    s.outlier_high = box_high;
    s.seed = seed;
    s.n_outliers = static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(n)));
    s.n_inliers = n - std::min(n, s.n_outliers);
    s.validate();
    return s;
  }
};

inline std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  for (auto tok : io::detail::split(text, ',')) {
    tok = io::detail::trim(tok);
    std::size_t v = 0;
    if (!io::detail::parse_int(tok, v) || v < 2)
      throw InvalidRange("bad size '" + std::string(tok) + "' in --sizes");
    sizes.push_back(v);
  }
  return sizes;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"One-class slab SVM trained by sequential minimal optimization"};
  app.require_subcommand(1);
  int verbose = 0;
  app.add_flag("-v,--verbose", verbose, "progress on stderr");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  DataFlags train_data;
  ParamFlags train_params;
  std::string train_out;
  train_data.add_to(*train_cmd);
  train_params.add_to(*train_cmd);
  train_cmd->add_option("--out,-o", train_out, "model file")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "label rows with a trained model");
  DataFlags predict_data;
  std::string predict_model, predict_out;
  bool scores_only = false;
  predict_data.add_to(*predict_cmd);
  predict_cmd->add_option("--model,-m", predict_model, "model file")->required();
  predict_cmd->add_option("--out,-o", predict_out, "output path (default stdout)");
  predict_cmd->add_flag("--scores-only", scores_only, "write raw scores without labels");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "timing and MCC across dataset sizes");
  ParamFlags bench_params;
  ToyFlags bench_toy;
  std::string sizes_text = "500,1000,2000,5000";
  std::string bench_out;
  bool with_oracle = false, bench_csv = false;
  std::size_t oracle_iters = 2000;
  bench_params.add_to(*bench_cmd);
  bench_toy.add_to(*bench_cmd, false);
  bench_cmd->add_option("--sizes", sizes_text, "comma-separated training sizes")->capture_default_str();
  bench_cmd->add_flag("--with-oracle", with_oracle, "also time the projected-gradient baseline");
  bench_cmd->add_option("--oracle-iters", oracle_iters, "baseline iteration cap")->capture_default_str();
  bench_cmd->add_option("--out,-o", bench_out, "write the CSV report here");
  bench_cmd->add_flag("--csv", bench_csv, "print CSV instead of the table");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "grid scores and plane data for 2-D models");
  DataFlags plot_data;
  std::string plot_model, plot_out;
  std::size_t grid = 50;
  plot_data.add_to(*plot_cmd);
  plot_cmd->add_option("--model,-m", plot_model, "model file")->required();
  plot_cmd->add_option("--grid", grid, "grid resolution per axis")->capture_default_str();
  plot_cmd->add_option("--out,-o", plot_out, "plot CSV path")->required();

  // gen-data
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a toy dataset");
  ToyFlags gen_toy;
  std::string gen_out;
  bool no_labels = false;
  gen_toy.add_to(*gen_cmd, true);
  gen_cmd->add_option("--seed", gen_toy.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--out,-o", gen_out, "CSV path")->required();
  gen_cmd->add_flag("--no-labels", no_labels, "omit the label column");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      const HyperParams p = train_params.params();
      const Dataset data = train_data.load();
      SolverOptions opts;
      opts.cache_rows = train_params.cache_rows;
      if (verbose > 0)
        opts.on_iteration = [&err](const IterationInfo& info) {
          if (info.iteration % 1000 == 0)
            err << "iter " << info.iteration << " objective " << info.objective << " gap " << info.gap << '\n';
        };
      validate_params(p, data.size());
      const TrainedModel model = train(data, p, std::move(opts));
      io::save_model(model, train_out);
      out << "iterations " << model.meta.iterations << '\n'
          << "max_violation " << model.meta.max_violation << '\n'
          << "wall_seconds " << model.meta.wall_seconds << '\n'
          << "status " << to_string(model.meta.status) << '\n'
          << "support_vectors " << model.support_vectors.size() << '\n'
          << "rho1 " << model.rho1 << '\n'
          << "rho2 " << model.rho2 << '\n';
      if (model.meta.status == TrainStatus::max_iter_reached)
        err << "warning: iteration cap reached before convergence; model written\n";
      if (model.meta.status == TrainStatus::no_progress) {
        err << "error: no admissible working pair remains; model written\n";
        return kExitInternal;
      }
      return kExitOk;
    }

    if (predict_cmd->parsed()) {
      const TrainedModel model = io::load_model(predict_model);
      const Dataset data = predict_data.load();
      if (data.dim() != model.dim)
        throw DimensionMismatch("data has " + std::to_string(data.dim()) + " features, model expects " +
                                std::to_string(model.dim));
      std::string text;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double s = score(model, data.features.row(i));
        if (scores_only) {
          text += io::detail::format_double(s) + '\n';
        } else {
          const int y = decide_score(model, s);
          text += (y > 0 ? "+1" : y < 0 ? "-1" : "0") + std::string(",") + io::detail::format_double(s) + '\n';
        }
      }
      if (predict_out.empty())
        out << text;
      else
        io::detail::write_file(predict_out, text);
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      const std::vector<std::size_t> sizes = parse_sizes(sizes_text);
      const HyperParams p = bench_params.params();
      io::ToyDataSpec spec = bench_toy.spec();
      BenchOptions opts;
      opts.with_oracle = with_oracle;
      opts.oracle_iters = oracle_iters;
      opts.solver.cache_rows = bench_params.cache_rows;
      const BenchReport report = run_bench(sizes, p, spec, opts);
      const std::string csv = format_bench_csv(report);
      if (!bench_out.empty()) io::detail::write_file(bench_out, csv);
      out << (bench_csv ? csv : format_bench_table(report));
      for (const BenchRow& row : report.rows)
        if (!row.error.empty()) return kExitInternal;
      return kExitOk;
    }

    if (plot_cmd->parsed()) {
      const TrainedModel model = io::load_model(plot_model);
      const Dataset data = plot_data.load();
      const PlotData pd = emit_plot_data(model, data, grid, plot_out);
      out << "grid_points " << pd.grid.size() << '\n' << "points " << pd.points.size() << '\n';
      return kExitOk;
    }

    if (gen_cmd->parsed()) {
      const io::ToyDataSpec spec = gen_toy.spec();
      Dataset data = io::generate_toy(spec);
      if (no_labels) data.labels.reset();
      io::save_csv(data, gen_out);
      out << "n_inliers " << spec.n_inliers << '\n'
          << "n_outliers " << spec.n_outliers << '\n'
          << "dim " << spec.dim << '\n'
          << "center";
      for (double c : spec.inlier_center) out << ' ' << c;
      out << '\n'
          << "spread " << spec.inlier_spread << '\n'
          << "outlier_box " << spec.outlier_low << ' ' << spec.outlier_high << '\n'
          << "seed " << spec.seed << '\n';
      return kExitOk;
    }
  } catch (const ParamError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace ocssvm::cli
