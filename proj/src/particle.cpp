#include "entroprox/particle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace entroprox {

namespace {

Vec scalar_vec(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

void ensure_finite_drift(double grad, const char* solver, std::int64_t t,
                         std::int64_t k, const char* chain) {
  if (!std::isfinite(grad)) {
    std::ostringstream msg;
    msg << solver << ": non-finite drift at outer step t=" << t
        << ", inner step k=" << k << " (" << chain << " chain)";
    throw std::runtime_error(msg.str());
  }
}

double sum_pair_d_dtheta(const ToyGame& game, std::span<const double> a,
                         std::span<const double> b, double theta) {
  double s = 0.0;
  for (const double w : a) s += game.pair_d_dtheta(w, theta);
  for (const double w : b) s += game.pair_d_dtheta(w, theta);
  return s;
}

double sum_pair_d_dw(const ToyGame& game, std::span<const double> a,
                     std::span<const double> b, double w) {
  double s = 0.0;
  for (const double theta : a) s += game.pair_d_dw(w, theta);
  for (const double theta : b) s += game.pair_d_dw(w, theta);
  return s;
}

// (1/n)·Σ of a fresh data batch; the w-derivative of the data-side payoff.
// Point-mass data is exact and consumes no randomness.
double fresh_data_mean(const ToyGame& game, int n, rng::Stream& data_stream) {
  if (game.real_noise_sd <= 0.0) return game.x0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    s += game.x0 + game.real_noise_sd * data_stream.normal();
  }
  return s / static_cast<double>(n);
}

// ∂_w of the data-side term (1/n)·Σ f_w(X_i) at w for the current batch.
double real_term_d_dw(const ToyGame& game, double w, int n,
                      rng::Stream& data_stream) {
  if (game.variant == ToyGame::Variant::kernel_torus) {
    return game.kernel->g().d_dw(w);
  }
  (void)w;  // f_w(x) = w·x is linear in w
  return fresh_data_mean(game, n, data_stream);
}

// Evaluation grid for the histogram duality-gap diagnostic: the same
// analytic kernel at diag_bins midpoints.
KernelGame diagnostic_game(const ToyGame& game) {
  const GridDomain dom(1, game.diag_bins, game.wrap_extent());
  return KernelGame(dom, dom, game.kernel->kernel(), game.kernel->g());
}

double ensemble_diagnostic(const ToyGame& game,
                           const std::optional<KernelGame>& diag_game,
                           const std::vector<double>& union_w,
                           const std::vector<double>& union_theta,
                           double mean_w, double mean_theta) {
  if (game.variant == ToyGame::Variant::kernel_torus) {
    const double extent = game.wrap_extent();
    const GridDensity mu =
        smoothed_histogram_density(union_w, game.diag_bins, extent);
    const GridDensity nu =
        smoothed_histogram_density(union_theta, game.diag_bins, extent);
    return grid_duality_gap(*diag_game, mu, nu);
  }
  const double dw = mean_w - game.saddle_w();
  const double dth = mean_theta - game.saddle_theta();
  return std::sqrt(dw * dw + dth * dth);
}

double gan_diagnostic(const ToyGame& game, double w, double theta) {
  if (game.variant == ToyGame::Variant::kernel_torus) {
    const double extent = game.kernel->dom_w().extent;
    return game.kernel->g().eval(w) - game.kernel->kernel().eval(w, theta,
                                                                 extent);
  }
  const double dw = w - game.saddle_w();
  const double dth = theta - game.saddle_theta();
  return std::sqrt(dw * dw + dth * dth);
}

// Chain pair with optional preconditioning; a run keeps one of these per
// player for its whole duration (noise streams and RMSProp accumulators
// persist across inner blocks).
struct Chain {
  LangevinState state;
  RmspropAccumulator acc;
  ChainKind kind;

  Chain(std::uint64_t seed, ChainKind kind_in)
      : state(scalar_vec(0.0), seed), kind(kind_in) {}

  double pos() const { return state.position(0); }
  void reseat(double x) { state.position(0) = x; }

  void step(double grad, double gamma, double eps, double wrap) {
    if (kind == ChainKind::plain) {
      sgld_step(state, scalar_vec(grad), gamma, eps, wrap);
    } else {
      preconditioned_sgld_step(state, acc, scalar_vec(grad), gamma, eps,
                               wrap);
    }
  }
};

std::vector<double> draw_initial(const ToyGame& game, int count,
                                 rng::Stream& init_stream) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  if (game.variant == ToyGame::Variant::kernel_torus) {
    const double extent = game.wrap_extent();
    for (auto& x : xs) x = init_stream.uniform(0.0, extent);
  } else {
    for (auto& x : xs) x = init_stream.uniform(-1.0, 1.0);
  }
  return xs;
}

void check_run_args(std::int64_t T, int n, int n_samples) {
  if (T < 1) throw std::invalid_argument("particle solver: T must be >= 1");
  if (n < 1 || n_samples < 1) {
    throw std::invalid_argument(
        "particle solver: batch and sample counts must be >= 1");
  }
}

}  // namespace

ParticleEnsemble::ParticleEnsemble(std::vector<double> particles_in,
                                   int generation_in)
    : particles(std::move(particles_in)), generation(generation_in) {
  if (particles.empty()) {
    throw std::invalid_argument("ParticleEnsemble: needs at least 1 particle");
  }
  for (const double x : particles) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("ParticleEnsemble: non-finite particle");
    }
  }
}

double ParticleEnsemble::mean() const {
  double s = 0.0;
  for (const double x : particles) s += x;
  return s / static_cast<double>(particles.size());
}

ToyGame ToyGame::make_kernel_torus(KernelGame game, int batch, int samples) {
  if (game.kernel().kind == Kernel::Kind::matrix_lookup) {
    throw std::invalid_argument(
        "ToyGame: particle chains need an analytic kernel");
  }
  if (game.dom_w().extent != game.dom_th().extent) {
    throw std::invalid_argument(
        "ToyGame: kernel_torus domains must share one extent");
  }
  if (batch < 1 || samples < 1) {
    throw std::invalid_argument("ToyGame: batch and samples must be >= 1");
  }
  ToyGame g;
  g.variant = Variant::kernel_torus;
  g.kernel = std::move(game);
  g.confinement = 0.0;
  g.batch = batch;
  g.samples = samples;
  return g;
}

ToyGame ToyGame::make_dirac_gan(double x0, double confinement, int batch,
                                int samples, double real_noise_sd) {
  if (!(confinement > 0.0)) {
    throw std::invalid_argument(
        "ToyGame: dirac_gan needs confinement > 0 to have a proper saddle");
  }
  if (!(real_noise_sd >= 0.0) || !std::isfinite(x0)) {
    throw std::invalid_argument("ToyGame: invalid dirac_gan data parameters");
  }
  if (batch < 1 || samples < 1) {
    throw std::invalid_argument("ToyGame: batch and samples must be >= 1");
  }
  ToyGame g;
  g.variant = Variant::dirac_gan;
  g.x0 = x0;
  g.confinement = confinement;
  g.batch = batch;
  g.samples = samples;
  g.real_noise_sd = real_noise_sd;
  return g;
}

double ToyGame::wrap_extent() const {
  if (variant == Variant::kernel_torus) return kernel->dom_w().extent;
  return 0.0;
}

double ToyGame::payoff_bound() const {
  if (variant == Variant::kernel_torus) return kernel->grad_bound();
  return std::abs(x0) + 3.0 * real_noise_sd;
}

double ToyGame::saddle_w() const {
  if (variant != Variant::dirac_gan) {
    throw std::logic_error("ToyGame: saddle coordinates are dirac_gan-only");
  }
  return confinement * x0 / (1.0 + confinement * confinement);
}

double ToyGame::saddle_theta() const {
  if (variant != Variant::dirac_gan) {
    throw std::logic_error("ToyGame: saddle coordinates are dirac_gan-only");
  }
  return x0 / (1.0 + confinement * confinement);
}

double ToyGame::pair_value(double w, double theta) const {
  if (variant == Variant::kernel_torus) {
    return kernel->kernel().eval(w, theta, kernel->dom_w().extent);
  }
  return w * theta;
}

double ToyGame::pair_d_dw(double w, double theta) const {
  if (variant == Variant::kernel_torus) {
    return kernel->kernel().d_dw(w, theta, kernel->dom_w().extent);
  }
  (void)w;
  return theta;
}

double ToyGame::pair_d_dtheta(double w, double theta) const {
  if (variant == Variant::kernel_torus) {
    return kernel->kernel().d_dtheta(w, theta, kernel->dom_w().extent);
  }
  (void)theta;
  return w;
}

DerivativeEstimates::DerivativeEstimates(const ToyGame& game,
                                         const ParticleEnsemble& w_ensemble,
                                         const ParticleEnsemble& theta_ensemble,
                                         rng::Stream& data_stream)
    : game_(&game),
      w_particles_(w_ensemble.particles),
      theta_particles_(theta_ensemble.particles) {
  if (w_particles_.empty() || theta_particles_.empty()) {
    throw std::invalid_argument("DerivativeEstimates: empty ensemble");
  }
  if (game.variant == ToyGame::Variant::dirac_gan) {
    data_mean_ = fresh_data_mean(game, game.batch, data_stream);
  }
}

double DerivativeEstimates::real_payoff(double w) const {
  if (game_->variant == ToyGame::Variant::kernel_torus) {
    return game_->kernel->g().eval(w);
  }
  return w * data_mean_;
}

double DerivativeEstimates::real_payoff_d_dw(double w) const {
  if (game_->variant == ToyGame::Variant::kernel_torus) {
    return game_->kernel->g().d_dw(w);
  }
  (void)w;
  return data_mean_;
}

double DerivativeEstimates::ensemble_payoff(double w) const {
  double s = 0.0;
  for (const double theta : theta_particles_) s += game_->pair_value(w, theta);
  return s / static_cast<double>(theta_particles_.size());
}

double DerivativeEstimates::ensemble_payoff_d_dw(double w) const {
  double s = 0.0;
  for (const double theta : theta_particles_) s += game_->pair_d_dw(w, theta);
  return s / static_cast<double>(theta_particles_.size());
}

double DerivativeEstimates::ensemble_coupling(double theta) const {
  double s = 0.0;
  for (const double w : w_particles_) s += game_->pair_value(w, theta);
  return s / static_cast<double>(w_particles_.size());
}

double DerivativeEstimates::ensemble_coupling_d_dtheta(double theta) const {
  double s = 0.0;
  for (const double w : w_particles_) s += game_->pair_d_dtheta(w, theta);
  return s / static_cast<double>(w_particles_.size());
}

DerivativeEstimates stochastic_derivative_estimates(
    const ToyGame& game, const ParticleEnsemble& w_ensemble,
    const ParticleEnsemble& theta_ensemble, rng::Stream& data_stream) {
  return DerivativeEstimates(game, w_ensemble, theta_ensemble, data_stream);
}

const ParticleEnsemble& EnsembleRun::sampled_w() const {
  return w_gens.at(static_cast<std::size_t>(sampled_index - 1));
}

const ParticleEnsemble& EnsembleRun::sampled_theta() const {
  return theta_gens.at(static_cast<std::size_t>(sampled_index - 1));
}

EnsembleRun approx_inf_md(const ToyGame& game, std::int64_t T,
                          const SgldSchedule& schedule, int n, int n_samples,
                          std::uint64_t seed) {
  check_run_args(T, n, n_samples);
  rng::Stream init_stream(rng::mix(seed, 0));
  Chain theta_chain(rng::mix(seed, 1), ChainKind::plain);
  Chain w_chain(rng::mix(seed, 2), ChainKind::plain);
  rng::Stream data_stream(rng::mix(seed, 3));
  rng::Stream index_stream(rng::mix(seed, 4));

  const double wrap = game.wrap_extent();
  const double lambda = game.confinement;
  const std::optional<KernelGame> diag_game =
      game.variant == ToyGame::Variant::kernel_torus
          ? std::optional<KernelGame>(diagnostic_game(game))
          : std::nullopt;

  EnsembleRun run;
  run.w_gens.emplace_back(draw_initial(game, n_samples, init_stream), 1);
  run.theta_gens.emplace_back(draw_initial(game, n_samples, init_stream), 1);

  // Flat historical unions, appended once per generation.
  std::vector<double> union_w = run.w_gens[0].particles;
  std::vector<double> union_theta = run.theta_gens[0].particles;
  union_w.reserve(static_cast<std::size_t>(T) * n_samples);
  union_theta.reserve(static_cast<std::size_t>(T) * n_samples);

  run.diagnostics.push_back(
      ensemble_diagnostic(game, diag_game, union_w, union_theta,
                          run.w_gens[0].mean(), run.theta_gens[0].mean()));

  const double inv_nprime = 1.0 / static_cast<double>(n_samples);
  for (std::int64_t t = 1; t < T; ++t) {
    const SgldSchedule::Point pt = schedule.at(t);
    const double td = static_cast<double>(t);
    const auto& w_gen = run.w_gens.back().particles;
    const auto& theta_gen = run.theta_gens.back().particles;
    w_chain.reseat(w_gen[index_stream.below(w_gen.size())]);
    theta_chain.reseat(theta_gen[index_stream.below(theta_gen.size())]);
    run.peak_union_size = std::max(run.peak_union_size, union_w.size());

    std::vector<double> next_w, next_theta;
    next_w.reserve(static_cast<std::size_t>(n_samples));
    next_theta.reserve(static_cast<std::size_t>(n_samples));
    for (std::int64_t k = 1; k <= pt.K + n_samples; ++k) {
      const double theta_ascent =
          inv_nprime * sum_pair_d_dtheta(game, union_w, {}, theta_chain.pos()) -
          lambda * td * theta_chain.pos();
      ensure_finite_drift(-theta_ascent, "approx_inf_md", t, k, "theta");
      theta_chain.step(-theta_ascent, pt.gamma, pt.eps, wrap);
      run.derivative_evals += static_cast<std::int64_t>(union_w.size());

      const double real_dw = real_term_d_dw(game, w_chain.pos(), n,
                                            data_stream);
      const double w_ascent =
          td * real_dw -
          inv_nprime * sum_pair_d_dw(game, union_theta, {}, w_chain.pos()) -
          lambda * td * w_chain.pos();
      ensure_finite_drift(-w_ascent, "approx_inf_md", t, k, "w");
      w_chain.step(-w_ascent, pt.gamma, pt.eps, wrap);
      run.derivative_evals += static_cast<std::int64_t>(union_theta.size());

      if (k > pt.K) {
        next_w.push_back(w_chain.pos());
        next_theta.push_back(theta_chain.pos());
      }
    }
    run.w_gens.emplace_back(std::move(next_w), static_cast<int>(t) + 1);
    run.theta_gens.emplace_back(std::move(next_theta),
                                static_cast<int>(t) + 1);
    const auto& hw = run.w_gens.back().particles;
    const auto& ht = run.theta_gens.back().particles;
    union_w.insert(union_w.end(), hw.begin(), hw.end());
    union_theta.insert(union_theta.end(), ht.begin(), ht.end());
    run.diagnostics.push_back(
        ensemble_diagnostic(game, diag_game, union_w, union_theta,
                            run.w_gens.back().mean(),
                            run.theta_gens.back().mean()));
  }

  run.sampled_index = 1 + static_cast<int>(index_stream.below(
                              static_cast<std::uint64_t>(T)));
  run.stored_particles =
      2 * run.w_gens.size() * static_cast<std::size_t>(n_samples);
  return run;
}

EnsembleRun approx_inf_mp(const ToyGame& game, std::int64_t T,
                          const SgldSchedule& schedule, int n, int n_samples,
                          std::uint64_t seed) {
  check_run_args(T, n, n_samples);
  rng::Stream init_stream(rng::mix(seed, 0));
  Chain theta_chain(rng::mix(seed, 1), ChainKind::plain);
  Chain w_chain(rng::mix(seed, 2), ChainKind::plain);
  rng::Stream data_stream(rng::mix(seed, 3));
  rng::Stream index_stream(rng::mix(seed, 4));

  const double wrap = game.wrap_extent();
  const double lambda = game.confinement;
  const std::optional<KernelGame> diag_game =
      game.variant == ToyGame::Variant::kernel_torus
          ? std::optional<KernelGame>(diagnostic_game(game))
          : std::nullopt;

  EnsembleRun run;
  run.w_base_gens.emplace_back(draw_initial(game, n_samples, init_stream), 1);
  run.theta_base_gens.emplace_back(draw_initial(game, n_samples, init_stream),
                                   1);

  // Flat unions over the LEADER generations only (the base generations enter
  // the leader block's sums through the current base ensemble).
  std::vector<double> union_w, union_theta;
  union_w.reserve(static_cast<std::size_t>(T) * n_samples);
  union_theta.reserve(static_cast<std::size_t>(T) * n_samples);

  const double inv_nprime = 1.0 / static_cast<double>(n_samples);
  // One damped-chain block: start at `start`, take K burn-in plus n'
  // harvested steps against the unions (a ∪ b per player), return harvest.
  const auto run_block = [&](const SgldSchedule::Point& pt, std::int64_t t,
                             double start_w, double start_theta,
                             std::span<const double> w_union_a,
                             std::span<const double> w_union_b,
                             std::span<const double> theta_union_a,
                             std::span<const double> theta_union_b,
                             std::vector<double>& out_w,
                             std::vector<double>& out_theta) {
    const double td = static_cast<double>(t);
    w_chain.reseat(start_w);
    theta_chain.reseat(start_theta);
    run.peak_union_size = std::max(run.peak_union_size,
                                   w_union_a.size() + w_union_b.size());
    for (std::int64_t k = 1; k <= pt.K + n_samples; ++k) {
      const double theta_ascent =
          inv_nprime * sum_pair_d_dtheta(game, w_union_a, w_union_b,
                                         theta_chain.pos()) -
          lambda * td * theta_chain.pos();
      ensure_finite_drift(-theta_ascent, "approx_inf_mp", t, k, "theta");
      theta_chain.step(-theta_ascent, pt.gamma, pt.eps, wrap);
      run.derivative_evals +=
          static_cast<std::int64_t>(w_union_a.size() + w_union_b.size());

      const double real_dw = real_term_d_dw(game, w_chain.pos(), n,
                                            data_stream);
      const double w_ascent =
          td * real_dw -
          inv_nprime * sum_pair_d_dw(game, theta_union_a, theta_union_b,
                                     w_chain.pos()) -
          lambda * td * w_chain.pos();
      ensure_finite_drift(-w_ascent, "approx_inf_mp", t, k, "w");
      w_chain.step(-w_ascent, pt.gamma, pt.eps, wrap);
      run.derivative_evals +=
          static_cast<std::int64_t>(theta_union_a.size() +
                                    theta_union_b.size());

      if (k > pt.K) {
        out_w.push_back(w_chain.pos());
        out_theta.push_back(theta_chain.pos());
      }
    }
  };

  for (std::int64_t t = 1; t <= T; ++t) {
    const SgldSchedule::Point pt = schedule.at(t);
    const auto& base_w = run.w_base_gens.back().particles;
    const auto& base_theta = run.theta_base_gens.back().particles;

    // Leader block: current base generation plus the leader history.
    const double lw = base_w[index_stream.below(base_w.size())];
    const double lth = base_theta[index_stream.below(base_theta.size())];
    std::vector<double> lead_w, lead_theta;
    lead_w.reserve(static_cast<std::size_t>(n_samples));
    lead_theta.reserve(static_cast<std::size_t>(n_samples));
    run_block(pt, t, lw, lth, base_w, union_w, base_theta, union_theta,
              lead_w, lead_theta);
    run.w_gens.emplace_back(std::move(lead_w), static_cast<int>(t));
    run.theta_gens.emplace_back(std::move(lead_theta), static_cast<int>(t));
    {
      const auto& hw = run.w_gens.back().particles;
      const auto& ht = run.theta_gens.back().particles;
      union_w.insert(union_w.end(), hw.begin(), hw.end());
      union_theta.insert(union_theta.end(), ht.begin(), ht.end());
    }
    run.diagnostics.push_back(
        ensemble_diagnostic(game, diag_game, union_w, union_theta,
                            run.w_gens.back().mean(),
                            run.theta_gens.back().mean()));

    // Extrapolation block: the full leader history (now including t).
    const double ew = base_w[index_stream.below(base_w.size())];
    const double eth = base_theta[index_stream.below(base_theta.size())];
    std::vector<double> next_w, next_theta;
    next_w.reserve(static_cast<std::size_t>(n_samples));
    next_theta.reserve(static_cast<std::size_t>(n_samples));
    run_block(pt, t, ew, eth, union_w, {}, union_theta, {}, next_w,
              next_theta);
    run.w_base_gens.emplace_back(std::move(next_w), static_cast<int>(t) + 1);
    run.theta_base_gens.emplace_back(std::move(next_theta),
                                     static_cast<int>(t) + 1);
  }

  run.sampled_index = 1 + static_cast<int>(index_stream.below(
                              static_cast<std::uint64_t>(T)));
  run.stored_particles = (run.w_gens.size() + run.w_base_gens.size()) * 2 *
                         static_cast<std::size_t>(n_samples);
  return run;
}

namespace {

GanRun run_damped(const ToyGame& game, std::int64_t T,
                  const SgldSchedule& schedule, double beta, int n,
                  std::uint64_t seed, ChainKind chains, bool extrapolating) {
  if (T < 1) throw std::invalid_argument("mirror solver: T must be >= 1");
  if (n < 1) throw std::invalid_argument("mirror solver: n must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) {
    // The closed endpoint is deliberate: beta = 1 with K_t ≡ 1 is the plain
    // alternating-chain reduction.
    throw std::invalid_argument("mirror solver: beta must be in (0, 1]");
  }
  const char* name = extrapolating ? "mirror_prox_gan" : "mirror_gan";

  rng::Stream init_stream(rng::mix(seed, 0));
  Chain theta_chain(rng::mix(seed, 1), chains);
  Chain w_chain(rng::mix(seed, 2), chains);
  rng::Stream data_stream(rng::mix(seed, 3));

  const double wrap = game.wrap_extent();
  const double lambda = game.confinement;

  double w = draw_initial(game, 1, init_stream)[0];
  double theta = draw_initial(game, 1, init_stream)[0];

  GanRun run;
  const auto record = [&](double wv, double thv) {
    run.w_trace.push_back(wv);
    run.theta_trace.push_back(thv);
    run.diagnostics.push_back(gan_diagnostic(game, wv, thv));
  };

  // One damped inner block: chains restart at (start_w, start_theta) and
  // evaluate against the fixed references (ref_w inside the θ-chain, fakes
  // from ref_theta inside the w-chain); the damped averages of the visited
  // chain states are returned.
  const auto run_block = [&](const SgldSchedule::Point& pt, std::int64_t t,
                             double start_w, double start_theta, double ref_w,
                             double ref_theta) {
    AveragedState ema{start_w, start_theta, beta};
    w_chain.reseat(start_w);
    theta_chain.reseat(start_theta);
    for (std::int64_t k = 1; k <= pt.K; ++k) {
      const double theta_ascent = game.pair_d_dtheta(ref_w, theta_chain.pos()) -
                                  lambda * theta_chain.pos();
      ensure_finite_drift(-theta_ascent, name, t, k, "theta");
      theta_chain.step(-theta_ascent, pt.gamma, pt.eps, wrap);

      const double real_dw = real_term_d_dw(game, w_chain.pos(), n,
                                            data_stream);
      const double w_ascent = real_dw -
                              game.pair_d_dw(w_chain.pos(), ref_theta) -
                              lambda * w_chain.pos();
      ensure_finite_drift(-w_ascent, name, t, k, "w");
      w_chain.step(-w_ascent, pt.gamma, pt.eps, wrap);
      run.derivative_evals += 2;

      ema.update(w_chain.pos(), theta_chain.pos());
    }
    return ema;
  };

  if (!extrapolating) {
    record(w, theta);
    for (std::int64_t t = 1; t < T; ++t) {
      const SgldSchedule::Point pt = schedule.at(t);
      const AveragedState ema = run_block(pt, t, w, theta, w, theta);
      w = (1.0 - beta) * w + beta * ema.w_bar;
      theta = (1.0 - beta) * theta + beta * ema.theta_bar;
      record(w, theta);
    }
  } else {
    // Base pair (the chains' restart point) and leader pair (the output).
    double base_w = w, base_theta = theta;
    record(w, theta);
    run.w_base_trace.push_back(base_w);
    run.theta_base_trace.push_back(base_theta);
    for (std::int64_t t = 1; t <= T; ++t) {
      const SgldSchedule::Point pt = schedule.at(t);
      const AveragedState lead =
          run_block(pt, t, base_w, base_theta, base_w, base_theta);
      w = (1.0 - beta) * w + beta * lead.w_bar;
      theta = (1.0 - beta) * theta + beta * lead.theta_bar;
      record(w, theta);
      const AveragedState extra =
          run_block(pt, t, base_w, base_theta, w, theta);
      base_w = (1.0 - beta) * base_w + beta * extra.w_bar;
      base_theta = (1.0 - beta) * base_theta + beta * extra.theta_bar;
      run.w_base_trace.push_back(base_w);
      run.theta_base_trace.push_back(base_theta);
    }
  }

  run.w_final = w;
  run.theta_final = theta;
  return run;
}

}  // namespace

GanRun mirror_gan(const ToyGame& game, std::int64_t T,
                  const SgldSchedule& schedule, double beta, int n,
                  std::uint64_t seed, ChainKind chains) {
  return run_damped(game, T, schedule, beta, n, seed, chains, false);
}

GanRun mirror_prox_gan(const ToyGame& game, std::int64_t T,
                       const SgldSchedule& schedule, double beta, int n,
                       std::uint64_t seed, ChainKind chains) {
  return run_damped(game, T, schedule, beta, n, seed, chains, true);
}

std::vector<double> all_particles(const std::vector<ParticleEnsemble>& gens) {
  std::vector<double> xs;
  std::size_t total = 0;
  for (const auto& g : gens) total += g.particles.size();
  xs.reserve(total);
  for (const auto& g : gens) {
    xs.insert(xs.end(), g.particles.begin(), g.particles.end());
  }
  return xs;
}

namespace {

std::vector<double> histogram_counts(const std::vector<double>& xs, int bins,
                                     double extent) {
  if (bins < 1 || !(extent > 0.0)) {
    throw std::invalid_argument("histogram_masses: invalid bins or extent");
  }
  if (xs.empty()) {
    throw std::invalid_argument("histogram_masses: no samples");
  }
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (const double x : xs) {
    if (!(x >= 0.0 && x < extent)) {
      throw std::invalid_argument(
          "histogram_masses: sample outside [0, extent)");
    }
    const auto b = std::min<std::size_t>(
        static_cast<std::size_t>(x / extent * bins), counts.size() - 1);
    counts[b] += 1.0;
  }
  return counts;
}

}  // namespace

std::vector<double> histogram_masses(const std::vector<double>& xs, int bins,
                                     double extent) {
  std::vector<double> mass = histogram_counts(xs, bins, extent);
  for (auto& m : mass) m /= static_cast<double>(xs.size());
  return mass;
}

std::vector<double> rebin_masses(const GridDensity& density, int bins) {
  const GridDomain& dom = density.domain();
  if (dom.dims != 1) {
    throw std::invalid_argument("rebin_masses: 1-D densities only");
  }
  if (bins < 1) throw std::invalid_argument("rebin_masses: bins must be >= 1");
  const Vec cell_masses = density.masses();
  std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
  for (Eigen::Index k = 0; k < dom.cells(); ++k) {
    const double center = dom.coordinate(k)(0);
    const auto b = std::min<std::size_t>(
        static_cast<std::size_t>(center / dom.extent * bins), mass.size() - 1);
    mass[b] += cell_masses(k);
  }
  return mass;
}

double binned_tv(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument("binned_tv: size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

GridDensity smoothed_histogram_density(const std::vector<double>& xs,
                                       int bins, double extent) {
  const std::vector<double> counts = histogram_counts(xs, bins, extent);
  const double denom =
      static_cast<double>(xs.size()) + 0.5 * static_cast<double>(bins);
  Vec m(bins);
  for (int b = 0; b < bins; ++b) {
    m(b) = (counts[static_cast<std::size_t>(b)] + 0.5) / denom;
  }
  return GridDensity::from_masses(GridDomain(1, bins, extent), m);
}

std::vector<double> sample_from_density(const GridDensity& density, int count,
                                        rng::Stream& stream) {
  const GridDomain& dom = density.domain();
  if (dom.dims != 1) {
    throw std::invalid_argument("sample_from_density: 1-D densities only");
  }
  if (count < 1) {
    throw std::invalid_argument("sample_from_density: count must be >= 1");
  }
  const Vec mass = density.masses();
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (auto& x : xs) {
    const double u = stream.uniform01();
    double acc = 0.0;
    Eigen::Index pick = dom.cells() - 1;
    for (Eigen::Index k = 0; k < dom.cells(); ++k) {
      acc += mass(k);
      if (u < acc) {
        pick = k;
        break;
      }
    }
    x = dom.coordinate(pick)(0);
  }
  return xs;
}

void save_particle_trace_csv(const EnsembleRun& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_particle_trace_csv: cannot open " + path);
  }
  out << std::setprecision(17);
  const int n_samples = run.w_gens.empty() ? 0 : run.w_gens.front().size();
  out << "t";
  for (int i = 1; i <= n_samples; ++i) out << ",w" << i;
  for (int i = 1; i <= n_samples; ++i) out << ",theta" << i;
  out << ",diagnostic\n";
  for (std::size_t g = 0; g < run.w_gens.size(); ++g) {
    out << run.w_gens[g].generation;
    for (const double x : run.w_gens[g].particles) out << ',' << x;
    for (const double x : run.theta_gens[g].particles) out << ',' << x;
    out << ',' << run.diagnostics[g] << '\n';
  }
}

void save_gan_trace_csv(const GanRun& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_gan_trace_csv: cannot open " + path);
  }
  out << std::setprecision(17);
  out << "t,w,theta,diagnostic\n";
  for (std::size_t i = 0; i < run.w_trace.size(); ++i) {
    out << i + 1 << ',' << run.w_trace[i] << ',' << run.theta_trace[i] << ','
        << run.diagnostics[i] << '\n';
  }
}

}  // namespace entroprox
