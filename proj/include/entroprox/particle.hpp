#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entroprox/grid.hpp"
#include "entroprox/rng.hpp"
#include "entroprox/sgld.hpp"

namespace entroprox {

// A finite set of scalar strategy parameters standing in for one player's
// measure (its empirical distribution). Produced in generations by the
// interacting-chain solvers below; on periodic games positions are already
// wrapped into [0, extent).
struct ParticleEnsemble {
  std::vector<double> particles;
  int generation = 1;

  ParticleEnsemble(std::vector<double> particles_in, int generation_in);

  int size() const { return static_cast<int>(particles.size()); }
  double mean() const;
};

// Exponentially damped running summary of a parameter pair:
//   value ← (1−β)·value + β·new.
// After K updates with a constant input c this contracts as
//   value = (1−β)^K·value₀ + (1−(1−β)^K)·c.
struct AveragedState {
  double w_bar = 0.0;
  double theta_bar = 0.0;
  double beta = 0.9;

  void update(double w_new, double theta_new) {
    w_bar = (1.0 - beta) * w_bar + beta * w_new;
    theta_bar = (1.0 - beta) * theta_bar + beta * theta_new;
  }
};

// Two-player zero-sum toy games with scalar strategies, in the two shapes
// the particle solvers understand:
//
//  - kernel_torus: the analytic payoff F(μ,ν) = ⟨μ,g⟩ − ⟨μ,Gν⟩ of a
//    KernelGame on periodic 1-D domains (both domains must share one
//    extent). A strategy parameter IS the point: the "generator" at θ is
//    the point mass δ_θ, so every empirical payoff batch over it collapses
//    exactly and the direct term g is evaluated analytically.
//  - dirac_gan: critic f_w(x) = w·x, generator P_θ = δ_θ, data
//    P_real = δ_{x0} (or N(x0, real_noise_sd²) when real_noise_sd > 0).
//    The bilinear payoff w·(x0 − θ) alone has no finite saddle-sampling
//    targets, so a quadratic confinement (λ/2)‖·‖² is subtracted from both
//    players' objectives (λ = confinement > 0 required). The regularized
//    objective w(x0−θ) − (λ/2)w² + (λ/2)θ² has the unique saddle
//      θ* = x0/(1+λ²),  w* = λ·x0/(1+λ²).
//
// `batch` (n) is the per-step data batch size and `samples` (n') the number
// of particles kept per measure; they are defaults the harness forwards to
// the solver calls below.
struct ToyGame {
  enum class Variant { kernel_torus, dirac_gan };

  Variant variant = Variant::kernel_torus;
  std::optional<KernelGame> kernel;  // kernel_torus only
  double x0 = 0.5;                   // dirac_gan data location
  double real_noise_sd = 0.0;        // 0 → point-mass data (no randomness)
  double confinement = 0.0;          // λ; dirac_gan requires λ > 0
  int batch = 32;                    // n
  int samples = 64;                  // n'
  int diag_bins = 32;                // histogram resolution for diagnostics

  // Analytic kernels only (matrix_lookup has no derivatives); both domains
  // must be 1-D with equal extents.
  static ToyGame make_kernel_torus(KernelGame game, int batch, int samples);
  static ToyGame make_dirac_gan(double x0, double confinement, int batch,
                                int samples, double real_noise_sd = 0.0);

  // Torus circumference for chain wrapping (0 = unwrapped real line).
  double wrap_extent() const;
  // Scale of |f| for Monte-Carlo tolerances: sup|K|+sup|g| resp. |x0|+3s.
  double payoff_bound() const;
  // dirac_gan only (throws std::logic_error otherwise).
  double saddle_w() const;
  double saddle_theta() const;

  // Pairwise payoff derivatives between single strategies. For dirac_gan
  // the fake sample at θ is θ itself, so ∂_w f_w(X(θ)) = θ and
  // ∂_θ f_w(X(θ)) = w; for kernel_torus they are the kernel derivatives.
  double pair_value(double w, double theta) const;
  double pair_d_dw(double w, double theta) const;
  double pair_d_dtheta(double w, double theta) const;
};

// Frozen empirical payoff estimators for one (data batch, ensemble pair)
// snapshot, with the exact (1/n)Σ and (1/(n·n'))ΣΣ normalizations of the
// solvers. Point-mass distributions collapse their batches exactly and
// consume no randomness; only Gaussian data draws from `data_stream`.
class DerivativeEstimates {
 public:
  DerivativeEstimates(const ToyGame& game, const ParticleEnsemble& w_ensemble,
                      const ParticleEnsemble& theta_ensemble,
                      rng::Stream& data_stream);

  // (1/n)·Σ_i f_w(X_i^data): the data-side payoff and its w-derivative.
  double real_payoff(double w) const;
  double real_payoff_d_dw(double w) const;
  // (1/(n·n'))·Σ_θ Σ_i f_w(X_i(θ)) over the θ-ensemble: the fake-side
  // payoff estimate of the coupling at w, and its w-derivative.
  double ensemble_payoff(double w) const;
  double ensemble_payoff_d_dw(double w) const;
  // Same double mean over the w-ensemble, as a function of θ: the coupling
  // estimate at θ and its θ-derivative.
  double ensemble_coupling(double theta) const;
  double ensemble_coupling_d_dtheta(double theta) const;

 private:
  const ToyGame* game_;
  std::vector<double> w_particles_, theta_particles_;
  double data_mean_ = 0.0;  // dirac_gan only: (1/n)·Σ X_i^data
};

DerivativeEstimates stochastic_derivative_estimates(
    const ToyGame& game, const ParticleEnsemble& w_ensemble,
    const ParticleEnsemble& theta_ensemble, rng::Stream& data_stream);

// Whether chains take plain Langevin steps or RMSProp-preconditioned ones
// (one persistent accumulator per player for the whole run).
enum class ChainKind { plain, preconditioned };

// Output of the ensemble solvers: all generations for both players, the
// uniformly sampled output index (1-based), one diagnostic per generation,
// and accounting counters that expose the O(T·n') memory / O(t·n')-per-step
// work contract.
struct EnsembleRun {
  std::vector<ParticleEnsemble> w_gens, theta_gens;
  // Extrapolating solver only: the auxiliary base-point generations.
  std::vector<ParticleEnsemble> w_base_gens, theta_base_gens;
  int sampled_index = 1;  // 1-based into w_gens/theta_gens
  // kernel_torus: duality gap of the smoothed cumulative-union histograms
  // on a diag_bins-point quadrature of the same kernel;
  // dirac_gan: distance of the generation's mean pair to the saddle.
  std::vector<double> diagnostics;
  std::int64_t derivative_evals = 0;   // pairwise ∂K / ∂f evaluations
  std::size_t stored_particles = 0;    // doubles retained across generations
  std::size_t peak_union_size = 0;     // largest drift-sum support |C|

  const ParticleEnsemble& sampled_w() const;
  const ParticleEnsemble& sampled_theta() const;
};

// Interacting-chain mirror descent over particle ensembles. Per outer step
// t = 1..T−1, with C = ∪_{s≤t} W[s] and D = ∪_{s≤t} Θ[s]:
// one chain per player starts at a uniformly chosen particle of the current
// generation and takes K_t burn-in plus n' harvested steps, where
//   θ-chain drift: +γ_t·(1/(n·n'))·∇_θ Σ_{X∼P_θ} Σ_{w∈C} f_w(X),
//   w-chain drift: +γ_t·t·(1/n)·∇_w Σ f_w(X^data)
//                  −γ_t·(1/(n·n'))·∇_w Σ_{θ∈D} Σ_{X∼P_θ} f_w(X),
// plus √(2γ_t)·ε_t noise. The factor t on the data term is mandatory (the
// direct payoff accumulates once per outer step while the coupling term's
// union already grows with t); the quadratic confinement, when present, is
// likewise scaled by t so its weight relative to the payoff stays fixed.
// The harvested states form W[t+1], Θ[t+1]. Throws std::runtime_error
// naming (t, k) if a drift turns non-finite.
EnsembleRun approx_inf_md(const ToyGame& game, std::int64_t T,
                          const SgldSchedule& schedule, int n, int n_samples,
                          std::uint64_t seed);

// Extrapolating variant, two blocks per outer step t = 1..T:
//  - leader block: drift unions B[t] ∪ (∪_{s<t} leader[s]) where B is the
//    base-point history, chains start from the current base generation,
//    harvest → leader generation t;
//  - extrapolation block: drift unions ∪_{s≤t} leader[s], chains start
//    from the current base generation, harvest → base generation t+1.
// The sampled output index ranges over the leader generations.
EnsembleRun approx_inf_mp(const ToyGame& game, std::int64_t T,
                          const SgldSchedule& schedule, int n, int n_samples,
                          std::uint64_t seed);

// Output of the single-parameter (exponentially damped) solvers: outer
// parameter traces including the initial pair, a diagnostic per entry
// (kernel_torus: pointwise payoff g(w) − K(w,θ); dirac_gan: distance to
// the saddle), and the final pair. stored_particles stays 0: these solvers
// keep O(1) state.
struct GanRun {
  std::vector<double> w_trace, theta_trace;
  std::vector<double> w_base_trace, theta_base_trace;  // extrapolating only
  std::vector<double> diagnostics;
  double w_final = 0.0, theta_final = 0.0;
  std::int64_t derivative_evals = 0;
  std::size_t stored_particles = 0;
};

// Single-parameter summary of the interacting-chain method. Per outer step
// t = 1..T−1: both chains restart at the current outer pair and take K_t
// steps against the FIXED opponent summary (the θ-chain ascends f_{w_t};
// the w-chain ascends data-vs-fake with fakes from P_{θ_t}), an
// exponentially damped average (β) tracks each chain per inner step, and
// the outer update is w_{t+1} = (1−β)·w_t + β·w̄_t (likewise θ). β = 1 with
// K_t ≡ 1 reduces to plain alternating Langevin steps. Returns the last
// computed outer pair.
GanRun mirror_gan(const ToyGame& game, std::int64_t T,
                  const SgldSchedule& schedule, double beta, int n,
                  std::uint64_t seed, ChainKind chains = ChainKind::plain);

// Extrapolating variant, two damped blocks per outer step t = 1..T: the
// leader block's chains start at the base pair (w̃_t, θ̃_t) and evaluate
// against the base pair, giving leader w_t = (1−β)·w_{t−1} + β·w̄_t; the
// extrapolation block's chains also start at the base pair but evaluate
// against the fresh leader pair, giving w̃_{t+1} = (1−β)·w̃_t + β·w̄'_t.
// Returns the leader pair at T. Traces: leader in w_trace/theta_trace
// (entry 0 is the initial pair), base points in the _base_ traces.
GanRun mirror_prox_gan(const ToyGame& game, std::int64_t T,
                       const SgldSchedule& schedule, double beta, int n,
                       std::uint64_t seed,
                       ChainKind chains = ChainKind::plain);

// ---- histogram / comparison helpers ----

// All generations' particles concatenated in order.
std::vector<double> all_particles(const std::vector<ParticleEnsemble>& gens);

// Normalized bin masses of xs over [0, extent) split into `bins` equal
// cells. All xs must lie in [0, extent).
std::vector<double> histogram_masses(const std::vector<double>& xs, int bins,
                                     double extent);

// Aggregate a (1-D) grid density's cell masses into `bins` equal intervals
// by cell-center membership.
std::vector<double> rebin_masses(const GridDensity& density, int bins);

// ½·Σ|a_i − b_i| for equal-length mass vectors.
double binned_tv(const std::vector<double>& a, const std::vector<double>& b);

// Additively smoothed histogram density on a `bins`-cell version of the
// 1-D domain: bin masses (count_b + ½)/(N + bins/2), so empty bins stay
// strictly positive.
GridDensity smoothed_histogram_density(const std::vector<double>& xs,
                                       int bins, double extent);

// `count` iid draws from the density's cell-mass distribution, each placed
// at its cell's midpoint (1-D).
std::vector<double> sample_from_density(const GridDensity& density, int count,
                                        rng::Stream& stream);

// ---- trace export ----

// One row per generation: t, the n' w-particles, the n' θ-particles, and
// the generation diagnostic. Header names the columns.
void save_particle_trace_csv(const EnsembleRun& run, const std::string& path);
// One row per outer step: t, w, theta, diagnostic.
void save_gan_trace_csv(const GanRun& run, const std::string& path);

}  // namespace entroprox
