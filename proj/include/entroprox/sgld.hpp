#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "entroprox/rng.hpp"
#include "entroprox/simplex.hpp"

namespace entroprox {

// Annealing schedule for interacting Langevin chains: the inner-chain length
// grows geometrically while the step size and temperature decay.
//   K_t = floor((1 + inner_growth)^t),
//   γ_t = gamma0 · (1 − gamma_decay)^t,
//   ε_t = eps0 · (1 − eps_decay)^t.
// Values of t below 1 are treated as t = 1.
struct SgldSchedule {
  double gamma0 = 1e-2;
  double eps0 = 1.0;
  double inner_growth = 1e-5;
  double gamma_decay = 1e-5;
  double eps_decay = 5e-5;

  struct Point {
    std::int64_t K;
    double gamma;
    double eps;
  };
  Point at(std::int64_t t) const;
};

// One Langevin chain: current position, number of steps taken, and the
// noise stream driving it.
struct LangevinState {
  Vec position;
  std::int64_t steps = 0;
  rng::Stream stream;

  LangevinState(Vec position_in, std::uint64_t seed)
      : position(std::move(position_in)), stream(seed) {}
};

// Euler–Maruyama step for the Langevin diffusion with target ∝ e^{−U/ε²}:
//   z ← z − γ·∇U(z) + √(2γ)·ε·ξ,  ξ ~ N(0, I).
// grad is the drift gradient VALUE at the current position (callers supply
// it; stochastic estimates are allowed). If wrap_extent > 0 each coordinate
// is wrapped back into [0, wrap_extent) (periodic domain). Throws
// std::runtime_error on non-finite gradients.
void sgld_step(LangevinState& state, const Vec& grad, double gamma, double eps,
               double wrap_extent = 0.0);

// RMSProp-style second-moment accumulator for preconditioned chains. The
// moving average is updated with the incoming gradient BEFORE the
// preconditioner is formed.
struct RmspropAccumulator {
  Vec ema;  // lazily sized to the first gradient
  double decay = 0.99;
  double floor_value = 1e-8;
};

// Preconditioned variant: with P = 1/(√ema + floor) (elementwise),
//   z ← z − γ·P∘grad + √(2γ)·ε·√P∘ξ.
void preconditioned_sgld_step(LangevinState& state, RmspropAccumulator& acc,
                              const Vec& grad, double gamma, double eps,
                              double wrap_extent = 0.0);

// Two-sample Kolmogorov–Smirnov statistic sup_x |F_a(x) − F_b(x)|.
double two_sample_ks(std::vector<double> a, std::vector<double> b);
// Asymptotic two-sample critical value c(α)·√((n+m)/(n·m)) with
// c(α) = √(−ln(α/2)/2).
double ks_critical(double alpha, std::size_t n, std::size_t m);

// Calibration run against the standard normal target U(z) = z²/2: a single
// scalar chain from z = 0 at fixed step size, thinned after burn-in to
// n_samples points, compared to fresh iid normal draws.
struct GaussianChainResult {
  double mean = 0.0;
  double variance = 0.0;  // sample variance of the thinned points
  double ks = 0.0;        // two-sample KS vs iid N(0,1) draws
  double ks_critical_1pct = 0.0;
  std::vector<double> samples;
};

GaussianChainResult unit_gaussian_chain_check(std::int64_t total_steps,
                                              std::int64_t burn_in,
                                              std::int64_t n_samples,
                                              double gamma, double eps,
                                              std::uint64_t seed);

}  // namespace entroprox
