#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entroprox/prox_finite.hpp"
#include "entroprox/simplex.hpp"

namespace entroprox {

// Uniform periodic grid (torus) in 1 or 2 dimensions: cell k covers
// [k·h, (k+1)·h) per axis with h = extent/points, represented by its
// midpoint. Quadrature is midpoint with uniform weights = cell volume.
struct GridDomain {
  int dims = 1;
  Eigen::Index points = 8;  // per dimension
  double extent = 1.0;      // each axis is [0, extent), periodic

  GridDomain(int dims_in, Eigen::Index points_in, double extent_in);

  Eigen::Index cells() const;
  double spacing() const { return extent / static_cast<double>(points); }
  double cell_volume() const;
  // Midpoint coordinate(s) of the flat cell index (row-major in 2-D).
  Vec coordinate(Eigen::Index flat) const;
  bool same_shape(const GridDomain& o) const {
    return dims == o.dims && points == o.points && extent == o.extent;
  }
};

// Strictly positive probability density on a grid, stored as the log of the
// Lebesgue density. Invariant: quadrature(exp(log_density)) = 1 within 1e-10
// and every entry finite.
class GridDensity {
 public:
  GridDensity(const GridDomain& dom, const Vec& log_density);

  static GridDensity uniform(const GridDomain& dom);
  // Normalizes exp(logw) against the quadrature, so any finite vector of
  // unnormalized log-weights yields a valid density.
  static GridDensity from_unnormalized_log(const GridDomain& dom,
                                           const Vec& logw);
  // masses must be strictly positive and sum to 1 within 1e-10.
  static GridDensity from_masses(const GridDomain& dom, const Vec& masses);
  // Periodic bump: log-density ∝ kappa·cos(2π(x−center)/extent) (1-D only).
  static GridDensity von_mises(const GridDomain& dom, double center,
                               double kappa);

  const GridDomain& domain() const { return dom_; }
  const Vec& log_density() const { return log_density_; }
  Vec density() const { return log_density_.array().exp(); }
  // Cell masses: density · cell volume; a simplex vector.
  Vec masses() const { return density() * dom_.cell_volume(); }

 private:
  struct unchecked_t {};
  GridDensity(const GridDomain& dom, Vec log_density, unchecked_t)
      : dom_(dom), log_density_(std::move(log_density)) {}
  GridDomain dom_;
  Vec log_density_;
};

// Φ(μ) = ∫ ρ log ρ (negative differential entropy w.r.t. Lebesgue).
double grid_entropy(const GridDensity& mu);
// D(μ‖μ') = ∫ ρ log(ρ/ρ').
double grid_kl(const GridDensity& mu, const GridDensity& mu_prime);
// TV(μ−μ') = ½ ∫ |ρ−ρ'|.
double grid_tv(const GridDensity& mu, const GridDensity& mu_prime);

// Payoff kernels in named analytic form, so particle methods can reuse the
// same game with exact derivatives. The matrix_lookup form indexes a table
// by cell and exists solely for the finite-case cross-check.
struct Kernel {
  enum class Kind { cosine, constant, gaussian_bump, matrix_lookup };
  Kind kind = Kind::cosine;
  double amplitude = 1.0;  // cosine & bump scale; value of the constant form
  double frequency = 1.0;  // cosine: K(w,θ) = amplitude·cos(frequency·(w−θ))
  double width = 0.1;      // bump: amplitude·exp(−d(w,θ)²/(2·width²))
  Eigen::MatrixXd table;   // matrix_lookup

  static Kernel cosine(double amplitude, double frequency);
  static Kernel constant(double value);
  static Kernel gaussian_bump(double amplitude, double width);
  static Kernel matrix_lookup(Eigen::MatrixXd table);

  double sup_abs() const;
  // Analytic evaluation (throws for matrix_lookup); `extent` is the torus
  // circumference used for periodic distance in the bump form.
  double eval(double w, double theta, double extent) const;
  double d_dw(double w, double theta, double extent) const;
  double d_dtheta(double w, double theta, double extent) const;
};

// The maximizing player's direct payoff term g(w), in named analytic form.
struct GFunc {
  enum class Kind { zero, cosine };
  Kind kind = Kind::zero;
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;

  static GFunc zero();
  static GFunc cosine(double amplitude, double frequency, double phase);

  double eval(double w) const;
  double d_dw(double w) const;
  double sup_abs() const;
};

// Two-player zero-sum game over measures with objective
//   F(μ, ν) = ⟨μ, g⟩ − ⟨μ, Gν⟩,
// where μ (over w ∈ W) maximizes and ν (over θ ∈ Θ) minimizes;
// (Gν)(w) = ∫K(w,θ)dν(θ) and (G†μ)(θ) = ∫K(w,θ)dμ(w). Domains are 1-D tori.
class KernelGame {
 public:
  KernelGame(const GridDomain& dom_w, const GridDomain& dom_th, Kernel kernel,
             GFunc g);

  const GridDomain& dom_w() const { return dom_w_; }
  const GridDomain& dom_th() const { return dom_th_; }
  const Kernel& kernel() const { return kernel_; }
  const GFunc& g() const { return g_; }

  // Raw kernel values on the grid: K(i,j) = K(w_i, θ_j).
  const Eigen::MatrixXd& K_matrix() const { return K_; }
  const Vec& g_vector() const { return g_values_; }

  double sup_K() const { return kernel_.sup_abs(); }
  double sup_g() const { return g_.sup_abs(); }
  double grad_bound() const { return sup_g() + sup_K(); }       // M
  double smoothness_bound() const { return 2.0 * sup_K(); }     // L (TV conv.)

 private:
  GridDomain dom_w_, dom_th_;
  Kernel kernel_;
  GFunc g_;
  Eigen::MatrixXd K_;
  Vec g_values_;
};

// The standard test instance: K(w,θ) = cos(2π(w−θ)) on [0,1)², g ≡ 0.
// Its unique mixed equilibrium is the uniform pair with value 0.
KernelGame cosine_game(Eigen::Index points);

// (Gν)(w_i) = Σ_j K(w_i,θ_j)·ν(θ_j)·cellvol(Θ) — midpoint quadrature.
Vec apply_G(const KernelGame& game, const GridDensity& nu);
// (G†μ)(θ_j) = Σ_i K(w_i,θ_j)·μ(w_i)·cellvol(W).
Vec apply_Gdag(const KernelGame& game, const GridDensity& mu);

// max_w (g−Gν)(w) + max_θ (G†μ)(θ) − ⟨μ,g⟩ (suprema over measures are
// attained at Diracs, i.e. grid points); clamped at 0 against roundoff.
double grid_duality_gap(const KernelGame& game, const GridDensity& mu,
                        const GridDensity& nu);

// Entropic mirror step on a density: log ρ' = log ρ − ηh − log Z.
GridDensity md_step_density(const GridDensity& mu, const Vec& h, double eta);

struct GridTrace {
  std::vector<TraceRecord> records;
  GridDomain dom_w, dom_th;
  // Ergodic mixtures (arithmetic means of densities) and last iterates,
  // stored as density values on the grid.
  Vec mu_bar, nu_bar, mu_last, nu_last;
  double eta = 0.0;
  std::int64_t T = 0;
  double M = 0.0, L = 0.0, D0_bar = 0.0, sigma2 = 0.0;

  GridDensity mu_bar_density() const;
  GridDensity nu_bar_density() const;
};

// Mirror descent on densities:
//   ν_{t+1} = MD(ν_t, −G†μ_t),  μ_{t+1} = MD(μ_t, −g + Gν_t),
// t = 1..T, with the same trace conventions as the finite solver (record
// before update; ergodic mixture over visited iterates).
GridTrace solve_inf_md(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, const GridDensity& mu0,
                       const GridDensity& nu0, std::int64_t trace_stride = 0);
GridTrace solve_inf_md(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, std::int64_t trace_stride = 0);

// Mirror-prox on densities (leader step from the base pair with fields at
// the base pair, extrapolated base update with fields at the leader pair,
// ergodic average over leader iterates).
GridTrace solve_inf_mp(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, const GridDensity& mu0,
                       const GridDensity& nu0, std::int64_t trace_stride = 0);
GridTrace solve_inf_mp(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, std::int64_t trace_stride = 0);

double md_bound_worst_ratio(const GridTrace& trace);
double mp_bound_worst_ratio(const GridTrace& trace);

// CSV export: one row per cell, "coordinate(s)..., density".
void save_density_csv(const GridDensity& d, const std::string& path);

}  // namespace entroprox
