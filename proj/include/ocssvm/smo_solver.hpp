#pragma once

// Sequential minimal optimization for the one-class slab SVM dual in
// gamma-space:
//
//   min   1/2 g' K g
//   s.t.  -eps/(nu2 m) <= g_i <= 1/(nu1 m),   sum_i g_i = 1 - eps
//
// with g = alpha - alpha_bar. Each step solves the two-variable subproblem
// in (g_a, g_b) analytically and clips it to the box.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "ocssvm/core_types.hpp"
#include "ocssvm/kernels.hpp"

namespace ocssvm {

inline constexpr double kDegenerateCurvature = 1e-12;

// The five valid gamma regions and the slab position each one requires.
enum class KktCase {
  inside_slab,     // g = 0, rho1 < score < rho2
  on_upper_plane,  // lower < g < 0, score = rho2
  above_slab,      // g = lower, score > rho2
  on_lower_plane,  // 0 < g < upper, score = rho1
  below_slab,      // g = upper, score < rho1
};

inline KktCase classify_gamma(double g, const GammaBox& box) {
  if (is_zero_gamma(g)) return KktCase::inside_slab;
  if (g > 0.0) return box.at_upper(g) ? KktCase::below_slab : KktCase::on_lower_plane;
  return box.at_lower(g) ? KktCase::above_slab : KktCase::on_upper_plane;
}

struct KktCheck {
  bool violated = false;
  double magnitude = 0.0;
  KktCase kase = KktCase::inside_slab;
};

// Tests the slab condition of point i against its gamma region. Equalities
// are accepted within tol; magnitude is the distance by which the required
// condition fails (0 when it holds).
inline KktCheck kkt_violation(const GammaState& state, const GammaBox& box, double tol,
                              std::size_t i) {
  const double s = state.scores[i];
  const double r1 = state.rho1;
  const double r2 = state.rho2;
  KktCheck c;
  c.kase = classify_gamma(state.gamma[i], box);
  switch (c.kase) {
    case KktCase::inside_slab:
      c.magnitude = std::max({r1 - s, s - r2, 0.0});
      break;
    case KktCase::on_upper_plane:
      c.magnitude = std::abs(s - r2);
      break;
    case KktCase::above_slab:
      c.magnitude = std::max(r2 - s, 0.0);
      break;
    case KktCase::on_lower_plane:
      c.magnitude = std::abs(s - r1);
      break;
    case KktCase::below_slab:
      c.magnitude = std::max(s - r1, 0.0);
      break;
  }
  c.violated = c.magnitude > tol;
  return c;
}

struct KktViolation {
  std::size_t index = 0;
  KktCase kase = KktCase::inside_slab;
  double magnitude = 0.0;
};

struct KktReport {
  std::vector<KktViolation> violations;
  double max_violation = 0.0;  // over violators only
};

inline KktReport kkt_report(const GammaState& state, const GammaBox& box, double tol) {
  KktReport r;
  for (std::size_t i = 0; i < state.gamma.size(); ++i) {
    const KktCheck c = kkt_violation(state, box, tol, i);
    if (!c.violated) continue;
    r.violations.push_back({i, c.kase, c.magnitude});
    r.max_violation = std::max(r.max_violation, c.magnitude);
  }
  return r;
}

// 1 / (k_aa + k_bb - 2 k_ab), or nullopt when the curvature vanishes.
inline std::optional<double> try_compute_eta(const KernelEngine& engine, std::size_t a,
                                             std::size_t b) {
  const double denom = engine.diag(a) + engine.diag(b) - 2.0 * engine.eval(a, b);
  if (!(denom > kDegenerateCurvature)) return std::nullopt;
  return 1.0 / denom;
}

inline double compute_eta(const KernelEngine& engine, std::size_t a, std::size_t b) {
  if (a == b) throw DegeneratePair("working pair needs two distinct indices");
  if (auto eta = try_compute_eta(engine, a, b)) return *eta;
  throw DegeneratePair("k_aa + k_bb - 2 k_ab vanishes for pair (" + std::to_string(a) + ", " +
                       std::to_string(b) + ")");
}

// Feasible interval [L, H] for the new g_b given t = g_a + g_b.
inline std::pair<double, double> clip_bounds(double t_star, const GammaBox& box) {
  const double lo = std::max(t_star - box.upper, box.lower);
  const double hi = std::min(box.upper, t_star - box.lower);
  return {lo, hi};
}

inline std::pair<double, double> clip_bounds(double t_star, const HyperParams& p, std::size_t m) {
  return clip_bounds(t_star, gamma_box(p, m));
}

// Unclipped minimizer of the pair subproblem, written as an increment on the
// old g_b. gradient_gap is sum_j g_j (k_aj - k_bj) = scores[a] - scores[b].
inline double unclipped_gamma_b(double gamma_b, double eta, double gradient_gap) {
  return gamma_b + eta * gradient_gap;
}

struct PairUpdate {
  std::size_t a = 0;
  std::size_t b = 0;
  double gamma_a_new = 0.0;
  double gamma_b_new = 0.0;
  double eta = 0.0;
  bool clipped = false;
};

// Analytic two-variable step on (a, b). Keeps the cached scores current.
inline PairUpdate update_pair(GammaState& state, KernelEngine& engine, std::size_t a,
                              std::size_t b, const GammaBox& box) {
  PairUpdate u;
  u.a = a;
  u.b = b;
  u.eta = compute_eta(engine, a, b);

  const double ga_old = state.gamma[a];
  const double gb_old = state.gamma[b];
  const double t_star = ga_old + gb_old;
  const auto [lo, hi] = clip_bounds(t_star, box);

  const double target = unclipped_gamma_b(gb_old, u.eta, state.scores[a] - state.scores[b]);
  const double gb_new = std::clamp(target, lo, hi);
  u.clipped = gb_new != target;
  // t* - g_b lies in the box up to rounding; clamp the last ulp away.
  const double ga_new = std::clamp(t_star - gb_new, box.lower, box.upper);

  u.gamma_a_new = ga_new;
  u.gamma_b_new = gb_new;

  const double da = ga_new - ga_old;
  const double db = gb_new - gb_old;
  state.gamma[a] = ga_new;
  state.gamma[b] = gb_new;
  if (da != 0.0) {
    const std::vector<double>& ka = engine.row(a);
    for (std::size_t i = 0; i < ka.size(); ++i) state.scores[i] += da * ka[i];
  }
  if (db != 0.0) {
    const std::vector<double>& kb = engine.row(b);
    for (std::size_t i = 0; i < kb.size(); ++i) state.scores[i] += db * kb[i];
  }
  return u;
}

// Plane offsets from the cached scores.
//
// rho1 averages the scores of points on the lower plane (0 < g < upper),
// rho2 those on the upper plane (lower < g < 0). With no point on a plane,
// the offset is placed at the nearest saturated score so the bound points
// stay on their required side: rho1 = max score over g = upper (or the
// minimum score overall when no g > 0), rho2 = min score over g = lower (or
// the maximum score overall when no g < 0).
inline std::pair<double, double> recover_rhos(const GammaState& state, const GammaBox& box) {
  double sum1 = 0.0, sum2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  double top_upper = -std::numeric_limits<double>::infinity();
  double bottom_lower = std::numeric_limits<double>::infinity();
  double min_all = std::numeric_limits<double>::infinity();
  double max_all = -std::numeric_limits<double>::infinity();
  bool any_upper = false, any_lower = false;

  for (std::size_t i = 0; i < state.gamma.size(); ++i) {
    const double s = state.scores[i];
    min_all = std::min(min_all, s);
    max_all = std::max(max_all, s);
    switch (classify_gamma(state.gamma[i], box)) {
      case KktCase::on_lower_plane:
        sum1 += s;
        ++n1;
        break;
      case KktCase::on_upper_plane:
        sum2 += s;
        ++n2;
        break;
      case KktCase::below_slab:
        any_upper = true;
        top_upper = std::max(top_upper, s);
        break;
      case KktCase::above_slab:
        any_lower = true;
        bottom_lower = std::min(bottom_lower, s);
        break;
      case KktCase::inside_slab:
        break;
    }
  }

  const double rho1 = n1 > 0 ? sum1 / static_cast<double>(n1) : (any_upper ? top_upper : min_all);
  const double rho2 = n2 > 0 ? sum2 / static_cast<double>(n2) : (any_lower ? bottom_lower : max_all);
  return {rho1, rho2};
}

// f-bar: signed distance to the nearer plane, negative outside the slab.
inline double slab_margin(double score, double rho1, double rho2) {
  return std::min(score - rho1, rho2 - score);
}

// Largest first-order violation over all feasible pair moves:
// max score over {g > lower} minus min score over {g < upper}.
struct OptimalityGap {
  double gap = -std::numeric_limits<double>::infinity();
  std::size_t increase = 0;  // argmin score among indices that may increase
  std::size_t decrease = 0;  // argmax score among indices that may decrease
};

inline OptimalityGap optimality_gap(const GammaState& state, const GammaBox& box) {
  OptimalityGap g;
  double min_up = std::numeric_limits<double>::infinity();
  double max_down = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.gamma.size(); ++i) {
    const double s = state.scores[i];
    if (box.can_increase(state.gamma[i]) && s < min_up) {
      min_up = s;
      g.increase = i;
    }
    if (box.can_decrease(state.gamma[i]) && s > max_down) {
      max_down = s;
      g.decrease = i;
    }
  }
  if (std::isfinite(min_up) && std::isfinite(max_down)) g.gap = max_down - min_up;
  return g;
}

enum class SelectionKind { pair, converged, no_progress };

struct Selection {
  SelectionKind kind = SelectionKind::converged;
  std::size_t b = 0;
  std::size_t a = 0;
  bool fallback = false;  // pair came from the maximal-violation rule
  std::size_t violators = 0;
  double max_violation = 0.0;
  double gap = 0.0;
};

struct SelectionOptions {
  // A pair is accepted only if its score difference is at least this
  // fraction of the optimality gap (and above tol).
  double pair_fraction = 0.5;
};

// Working-pair choice.
//
// b is the KKT violator with the largest |f-bar|; a maximizes
// |f-bar(b) - f-bar(a)| among partners that give a descent step whose
// score difference clears max(tol, pair_fraction * gap). Degenerate
// partners are skipped; a b without an admissible partner is dropped for
// this round. When the f-bar rule yields nothing, the maximal violating pair
// is used. Converged once the gap is within tol, which also leaves no
// five-case violator.
inline Selection select_pair(const GammaState& state, const KernelEngine& engine,
                             const GammaBox& box, double tol, const SelectionOptions& opts = {}) {
  const std::size_t m = state.gamma.size();
  Selection sel;

  std::vector<std::size_t> violators;
  for (std::size_t i = 0; i < m; ++i) {
    const KktCheck c = kkt_violation(state, box, tol, i);
    if (c.violated) {
      violators.push_back(i);
      sel.max_violation = std::max(sel.max_violation, c.magnitude);
    }
  }
  sel.violators = violators.size();

  const OptimalityGap og = optimality_gap(state, box);
  sel.gap = og.gap;
  if (og.gap <= tol) {
    sel.kind = SelectionKind::converged;
    return sel;
  }

  if (violators.size() >= 2) {
    std::vector<double> fbar(m);
    for (std::size_t i = 0; i < m; ++i)
      fbar[i] = slab_margin(state.scores[i], state.rho1, state.rho2);
    const double threshold = std::max(tol, opts.pair_fraction * og.gap);

    std::vector<char> remaining(violators.size(), 1);
    std::vector<std::pair<double, std::size_t>> partners;
    for (std::size_t round = 0; round < violators.size(); ++round) {
      std::size_t pick = violators.size();
      for (std::size_t k = 0; k < violators.size(); ++k) {
        if (!remaining[k]) continue;
        if (pick == violators.size() ||
            std::abs(fbar[violators[k]]) > std::abs(fbar[violators[pick]]))
          pick = k;
      }
      remaining[pick] = 0;
      const std::size_t b = violators[pick];
      const double gb = state.gamma[b];
      const double sb = state.scores[b];

      partners.clear();
      for (std::size_t a = 0; a < m; ++a) {
        if (a == b) continue;
        const double diff = state.scores[a] - sb;
        // diff > 0 moves mass from a to b, diff < 0 from b to a.
        const bool admissible =
            diff > 0 ? (diff >= threshold && box.can_increase(gb) && box.can_decrease(state.gamma[a]))
                     : (-diff >= threshold && box.can_decrease(gb) && box.can_increase(state.gamma[a]));
        if (admissible) partners.emplace_back(-std::abs(fbar[b] - fbar[a]), a);
      }
      std::sort(partners.begin(), partners.end());
      for (const auto& [neg_gap, a] : partners) {
        if (!try_compute_eta(engine, a, b)) continue;
        sel.kind = SelectionKind::pair;
        sel.b = b;
        sel.a = a;
        return sel;
      }
    }
  }

  if (try_compute_eta(engine, og.decrease, og.increase) && og.decrease != og.increase) {
    sel.kind = SelectionKind::pair;
    sel.b = og.increase;
    sel.a = og.decrease;
    sel.fallback = true;
    return sel;
  }
  sel.kind = SelectionKind::no_progress;
  return sel;
}

// Feasible start (uniform split of 1 - eps) with scores and plane offsets.
inline GammaState initialize_gamma(const HyperParams& p, const KernelEngine& engine) {
  const std::size_t m = engine.size();
  validate_params(p, m);
  const GammaBox box = gamma_box(p, m);
  GammaState st;
  st.gamma = feasible_start(box, m);
  st.scores = engine.all_scores(st.gamma);
  std::tie(st.rho1, st.rho2) = recover_rhos(st, box);
  return st;
}

struct IterationInfo {
  std::size_t iteration = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  bool fallback = false;
  std::size_t violators = 0;
  double gap = 0.0;
  double objective = 0.0;
  const GammaState* state = nullptr;
};

struct SolverOptions {
  std::size_t cache_rows = 0;  // 0: min(m, 512)
  // Full score recomputation period; 0 means every m iterations.
  std::size_t recompute_every = 0;
  SelectionOptions selection;
  std::function<void(const IterationInfo&)> on_iteration;
};

// One training session. Owns all mutable state; movable, not shareable.
class SmoSolver {
 public:
  SmoSolver(const Matrix& data, const HyperParams& p, SolverOptions opts = {})
      : params_(validate_params(p, data.rows())),
        opts_(std::move(opts)),
        engine_(p.kernel, data, opts_.cache_rows),
        box_(gamma_box(p, data.rows())),
        state_(initialize_gamma(params_, engine_)) {}

  const GammaState& state() const noexcept { return state_; }
  const GammaBox& box() const noexcept { return box_; }
  const HyperParams& params() const noexcept { return params_; }
  KernelEngine& engine() noexcept { return engine_; }
  std::size_t iterations() const noexcept { return iterations_; }
  TrainStatus status() const noexcept { return status_; }

  // 1/2 g'Kg from the cached scores.
  double objective() const {
    double s = 0.0;
    for (std::size_t i = 0; i < state_.gamma.size(); ++i) s += state_.gamma[i] * state_.scores[i];
    return 0.5 * s;
  }

  // One select/update/recover cycle. Returns false once the session stops.
  bool step() {
    if (done_) return false;
    if (iterations_ >= params_.iteration_cap(state_.gamma.size())) {
      finish(TrainStatus::max_iter_reached);
      return false;
    }
    const Selection sel = select_pair(state_, engine_, box_, params_.tol, opts_.selection);
    if (sel.kind == SelectionKind::converged) {
      finish(TrainStatus::converged);
      return false;
    }
    if (sel.kind == SelectionKind::no_progress) {
      finish(TrainStatus::no_progress);
      return false;
    }

    update_pair(state_, engine_, sel.a, sel.b, box_);
    ++iterations_;
    const std::size_t period =
        opts_.recompute_every == 0 ? state_.gamma.size() : opts_.recompute_every;
    if (iterations_ % period == 0) state_.scores = engine_.all_scores(state_.gamma);
    std::tie(state_.rho1, state_.rho2) = recover_rhos(state_, box_);

    if (opts_.on_iteration) {
      IterationInfo info;
      info.iteration = iterations_;
      info.a = sel.a;
      info.b = sel.b;
      info.fallback = sel.fallback;
      info.violators = sel.violators;
      info.gap = sel.gap;
      info.objective = objective();
      info.state = &state_;
      opts_.on_iteration(info);
    }
    return true;
  }

  TrainStatus run() {
    const auto t0 = std::chrono::steady_clock::now();
    while (step()) {
    }
    elapsed_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return status_;
  }

  TrainedModel model() const {
    TrainedModel m;
    const Matrix& x = engine_.data();
    for (std::size_t i = 0; i < state_.gamma.size(); ++i) {
      if (is_zero_gamma(state_.gamma[i])) continue;
      const auto row = x.row(i);
      m.support_vectors.push_back({std::vector<double>(row.begin(), row.end()), state_.gamma[i]});
    }
    m.rho1 = state_.rho1;
    m.rho2 = state_.rho2;
    m.kernel = engine_.spec();
    m.params = params_;
    m.dim = x.cols();
    m.train_size = x.rows();
    m.meta.iterations = iterations_;
    m.meta.max_violation = kkt_report(state_, box_, params_.tol).max_violation;
    m.meta.wall_seconds = elapsed_;
    m.meta.status = status_;
    return m;
  }

 private:
  void finish(TrainStatus s) {
    done_ = true;
    status_ = s;
  }

  HyperParams params_;
  SolverOptions opts_;
  KernelEngine engine_;
  GammaBox box_;
  GammaState state_;
  std::size_t iterations_ = 0;
  TrainStatus status_ = TrainStatus::converged;
  bool done_ = false;
  double elapsed_ = 0.0;
};

struct TrainOutcome {
  TrainedModel model;
  GammaState state;
};

inline TrainOutcome train_detailed(const Dataset& data, const HyperParams& p,
                                   SolverOptions opts = {}) {
  data.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SmoSolver solver(data.features, p, std::move(opts));
  solver.run();
  TrainOutcome out{solver.model(), solver.state()};
  out.model.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline TrainedModel train(const Dataset& data, const HyperParams& p, SolverOptions opts = {}) {
  return train_detailed(data, p, std::move(opts)).model;
}

}  // namespace ocssvm
