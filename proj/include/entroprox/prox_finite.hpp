#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "entroprox/matrix_game.hpp"
#include "entroprox/simplex.hpp"

namespace entroprox {

// Step-size selection for the entropic methods. All derived formulas follow
// the two-term analysis of the convergence proofs:
//   md_deterministic: η = (2/M)·√(D̄₀/T)
//   md_stochastic:    η = (2/M')·√(D̄₀/T)
//   mp_deterministic: η = 4/L
//   mp_stochastic:    η = min[ 4/(√3·L), √(2·D̄₀/(3·T·σ²)) ]
//   fixed:            η = fixed_eta
enum class StepKind {
  md_deterministic,
  md_stochastic,
  mp_deterministic,
  mp_stochastic,
  fixed,
};

struct StepSizeRule {
  StepKind kind = StepKind::fixed;
  double M = 0.0;        // sup-norm gradient bound
  double M_prime = 0.0;  // stochastic gradient bound M + noise_bound
  double L = 0.0;        // TV-operator smoothness constant
  double sigma2 = 0.0;   // per-coordinate noise variance
  double D0_bar = 0.0;   // divergence budget (log m + log n surrogate)
  double fixed_eta = 0.0;

  // Resolves η for horizon T; throws std::domain_error if the needed
  // parameters are missing/nonpositive or the resolved η is not > 0.
  double resolve(std::int64_t T) const;

  static StepSizeRule fixed_step(double eta);
  static StepSizeRule md_deterministic(double M, double D0_bar);
  static StepSizeRule md_stochastic(double M_prime, double D0_bar);
  static StepSizeRule mp_deterministic(double L);
  static StepSizeRule mp_stochastic(double L, double sigma2, double D0_bar);
};

struct TraceRecord {
  std::int64_t t;       // 1-based iteration index
  double gap_ergodic;   // duality gap at the running ergodic averages
  double gap_last;      // duality gap at the current iterates
  double eta;
};

struct ProxTrace {
  std::vector<TraceRecord> records;  // strictly increasing in t
  Vec p_bar, q_bar;                  // final ergodic averages (length n, m)
  Vec p_last, q_last;                // final iterates after the last update
  double eta = 0.0;
  std::int64_t T = 0;
  // Constants recorded so bound checks are self-contained.
  double M = 0.0, L = 0.0, D0_bar = 0.0, sigma2 = 0.0;
};

struct SolveOptions {
  // Gap evaluation stride; 0 means the default ⌈T/200⌉. Records are always
  // additionally taken at t ∈ {1, 10, 100, ...} and at t = T.
  std::int64_t trace_stride = 0;
  // Unset → exact deterministic gradients.
  std::optional<StochasticOracleConfig> oracle;
};

// Simultaneous two-player entropic mirror descent:
//   p_{t+1} = md(p_t, grad_p(q_t)),  q_{t+1} = md(q_t, grad_q(p_t)),
// for t = 1..T, averaging the T visited iterates: p̄_t = (1/t)Σ_{s≤t} p_s.
// The record at t evaluates the gap BEFORE the t-th update, so the first
// record is the initial pair's gap. Init must be strictly interior.
ProxTrace solve_md(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts,
                   const SimplexVector& p0, const SimplexVector& q0);

// Uniform-init convenience overload.
ProxTrace solve_md(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts = {});

// Mirror-prox (extragradient) with the same trace conventions: each round
// takes a leader step from the base point (p̃,q̃) using gradients at (p̃,q̃),
// then updates the base point using gradients at the leader point; the
// ergodic average runs over the leader iterates.
ProxTrace solve_mp(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts,
                   const SimplexVector& p0, const SimplexVector& q0);

ProxTrace solve_mp(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts = {});

// Worst ratio gap_ergodic / theoretical bound over all records, where the
// two-term mirror-descent bound is  D̄₀/(η·t) + η·M²/4.
double md_bound_worst_ratio(const ProxTrace& trace);

// Same for the mirror-prox bound D̄₀/(η·t), valid for η ≤ 4/L.
double mp_bound_worst_ratio(const ProxTrace& trace);

// Expected-gap bounds at horizon T for the stochastic step-size choices
// (compare against a mean over seeds):
//   MD: M'·√(D̄₀/T)
//   MP: max[ √(6·σ²·D̄₀/T), (√3/2)·L·D̄₀/T ]
double md_stochastic_gap_bound(double M_prime, double D0_bar, std::int64_t T);
double mp_stochastic_gap_bound(double L, double sigma2, double D0_bar,
                               std::int64_t T);

// True for t in {1, 10, 100, ...}.
bool is_power_of_ten(std::int64_t t);

}  // namespace entroprox
