#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entroprox/grid.hpp"
#include "entroprox/rng.hpp"

namespace entroprox {

// Randomized verification of the convex-calculus toolbox behind the entropic
// mirror map Φ(μ) = ∫ρ log ρ on grid densities: conjugacy with the log-
// partition functional, Bregman/KL identities, strong-convexity and
// smoothness inequalities, and the one-step mirror-descent estimates.
//
// Items c1..c10 ("a".."j"):
//   a  gibbs_variational          log∫e^h dμ' = ⟨μ*,h⟩ − KL(μ*‖μ'), μ* ∝ e^h μ'
//   b  fenchel_young              Φ*(h) ≥ ⟨μ,h⟩ − Φ(μ), equality at μ = dΦ*(h)
//                                 and at h = dΦ(μ)
//   c  bregman_of_entropy_is_kl   D_Φ(μ,μ') = KL(μ‖μ')
//   d  strong_convexity_tv        λΦ + (1−λ)Φ' − Φ(mix) ≥ 2λ(1−λ)·TV²
//   e  bregman_duality_shift      D_Φ(μ,μ') = D_{Φ*}(dΦ(μ')+C, dΦ(μ)) ∀C
//   f  quarter_smoothness_supnorm TV(dΦ*(h)−dΦ*(h')) ≤ ¼‖h−h'‖∞ and
//                                 D_{Φ*}(h,h') ≤ ⅛‖h−h'‖∞²  (as stated)
//   g  dual_bregman_swap          D_{Φ*}(h,h') = D_Φ(dΦ*(h'), dΦ*(h))
//   h  three_point_identity       D(a,b)+D(b,c)−D(a,c) = ⟨dΦ(c)−dΦ(b), a−b⟩
//   i  md_optimality_constant     dΦ(μ₊) − dΦ(μ) + ηh is constant on the grid
//   j  md_one_step_regret         ⟨μ−μ*, ηh'⟩ ≤ D(μ*,μ̃) − D(μ*,μ̃₊)
//                                 + (η²/8)‖h−h'‖∞² − 2TV(μ,μ̃)²
//
// Random ensembles (drawn from one substream per trial):
//   densities: softmax of iid standard normals at temperature τ,
//              τ log-uniform on [0.1, 10];
//   test functions: iid N(0, scale²), scale log-uniform on [0.1, 10];
//   λ uniform on (0,1); C uniform on (−10,10); η log-uniform on [0.01, 10].
struct ItemResult {
  std::string key;          // "a".."j"
  std::string description;
  // Identity checks: max |lhs − rhs| over trials (0 when the item has none).
  double worst_residual = 0.0;
  // Inequality checks: max over trials of (violating side − bounding side);
  // negative values mean the inequality held with room to spare.
  double worst_margin = 0.0;
  bool has_inequality = false;
  int violations = 0;       // trials with margin > slack
  bool pass = false;
};

struct FoundationsReport {
  std::vector<ItemResult> items;  // exactly 10, keys "a".."j"
  int trials = 0;
  std::uint64_t seed = 0;
  double identity_tol = 1e-9;
  double slack = 1e-12;
  bool all_pass() const;
  const ItemResult& item(const std::string& key) const;
};

FoundationsReport foundations_suite(const GridDomain& dom, int trials,
                                    std::uint64_t seed);

// The ensembles above, exposed for reuse in tests.
GridDensity random_density(const GridDomain& dom, rng::Stream& stream);
Vec random_test_function(Eigen::Index d, rng::Stream& stream);

}  // namespace entroprox
