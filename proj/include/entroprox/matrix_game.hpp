#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "entroprox/rng.hpp"
#include "entroprox/simplex.hpp"

namespace entroprox {

// Two-player zero-sum game with objective
//     F(p, q) = ⟨q, a⟩ − ⟨q, A p⟩,
// where the column player p (dimension n = A.cols()) minimizes and the row
// player q (dimension m = A.rows()) maximizes. Row index ↔ q-coordinate,
// column index ↔ p-coordinate.
struct MatrixGame {
  Eigen::MatrixXd A;  // m×n payoff matrix
  Vec a;              // length m

  MatrixGame(Eigen::MatrixXd A_in, Vec a_in);

  Eigen::Index m() const { return A.rows(); }  // q dimension
  Eigen::Index n() const { return A.cols(); }  // p dimension

  double value(const SimplexVector& p, const SimplexVector& q) const;

  // Sup-norm bound on both gradients over the product of simplices:
  // M = ‖a‖∞ + max_{ij}|A_{ij}|.
  double grad_bound() const;

  // Smoothness constant of the coupling w.r.t. TV = ½·ℓ1:
  // L = 2·max_{ij}|A_{ij}| (since ‖A(p−p')‖∞ ≤ max|A_{ij}|·‖p−p'‖₁).
  double smoothness_bound() const;
};

// Descent field fed to the p-player's mirror step: −Aᵀq (length n).
Vec grad_p(const MatrixGame& game, const SimplexVector& q);

// Descent field fed to the q-player's mirror step: −a + Ap (length m).
// The ascent player is driven through the same update with this sign, so
// mass grows on high-payoff rows.
Vec grad_q(const MatrixGame& game, const SimplexVector& p);

// Exact duality gap  max_{q'} F(p,q') − min_{p'} F(p',q)
//   = max_i (a − Ap)_i + max_j (Aᵀq)_j − ⟨q, a⟩  ≥ 0,
// zero exactly at Nash equilibria (simplex extrema are attained at vertices).
double duality_gap(const MatrixGame& game, const SimplexVector& p,
                   const SimplexVector& q);

// Additive bounded-uniform gradient noise: each coordinate gets independent
// U(−noise_bound, +noise_bound), so estimates are unbiased, the sup-norm
// bound degrades to M' = M + noise_bound, and the per-coordinate variance is
// noise_bound²/3.
struct StochasticOracleConfig {
  double noise_bound = 0.0;
  std::uint64_t seed = 0;
};

// Returns (grad_p + ξ_p, grad_q + ξ_q); the noise stream is determined by
// (seed, t, phase), so identical arguments give bit-identical outputs.
// `phase` distinguishes multiple oracle calls within one iteration (the
// two-stage update of mirror-prox); single-call-per-iteration methods use
// the default phase 0.
std::pair<Vec, Vec> stochastic_grads(const MatrixGame& game,
                                     const SimplexVector& p,
                                     const SimplexVector& q,
                                     const StochasticOracleConfig& cfg,
                                     std::int64_t t, std::int64_t phase = 0);

struct NashSolution {
  SimplexVector p;
  SimplexVector q;
  double value;
};

// Exact mixed equilibrium by support enumeration (supports ordered by total
// size, then lexicographically; first feasible pair returned). For each
// support pair the linear indifference-plus-normalization system is solved
// and feasibility plus absence of profitable pure deviations is verified.
// Requires m ≤ 5 and n ≤ 5; throws std::runtime_error otherwise.
NashSolution brute_force_ne(const MatrixGame& game);

// A = [[1,−1],[−1,1]], a = 0: unique equilibrium at the uniform pair.
MatrixGame matching_pennies();

// Entries of A and a drawn i.i.d. uniform on [−1, 1].
MatrixGame random_game(Eigen::Index m, Eigen::Index n, rng::Stream& stream);

// Structured text format: first line "m n", then m whitespace-separated rows
// of A, then the m entries of a.
MatrixGame load_game(const std::string& path);
void save_game(const MatrixGame& game, const std::string& path);

}  // namespace entroprox
