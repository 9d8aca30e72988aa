#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "entroprox/grid.hpp"
#include "entroprox/matrix_game.hpp"
#include "entroprox/particle.hpp"
#include "entroprox/prox_finite.hpp"
#include "entroprox/sgld.hpp"

namespace entroprox {

// Malformed or inconsistent configuration. `key` names the offending entry
// so error reports stay machine-readable; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Flat `key = value` structured text with `[section]` headers. Keys are
// addressed as "section.key" ("key" before any header). `#` starts a
// comment; blank lines are ignored; duplicate keys and lines that are
// neither assignments nor headers are errors.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& key) const;
  // Typed getters throw ConfigError naming the key on absence or bad form.
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  // Whitespace- or comma-separated list of unsigned seeds.
  std::vector<std::uint64_t> get_seeds(const std::string& key,
                                       std::vector<std::uint64_t> fallback);

  // Keys read so far are marked consumed; anything left over is likely a
  // typo, reported by ensure_all_consumed.
  void ensure_all_consumed() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
};

enum class SolverKind {
  md,
  mp,
  inf_md,
  inf_mp,
  approx_md,
  approx_mp,
  mirror_gan,
  mirror_prox_gan,
  foundations,
  sgld_check,
};

std::string solver_kind_name(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

// A fully resolved experiment: every field has its default filled in, and
// the JSON report echoes all of them back (reports are self-describing).
struct ExperimentConfig {
  SolverKind kind = SolverKind::md;
  std::string label;  // artifact basename; default = solver kind name
  std::int64_t T = 1000;
  std::vector<std::uint64_t> seeds = {1};
  std::int64_t trace_stride = 0;  // 0 → ⌈T/200⌉
  bool assert_bounds = false;
  std::string out_dir = ".";  // empty → compute only, write nothing

  // [game] — finite matrix games (md | mp)
  std::string game_source = "pennies";  // pennies | random | file
  std::int64_t game_m = 10, game_n = 10;
  std::uint64_t game_seed = 1;
  std::string game_path;

  // [kernel] / [g] — grid games (inf_md | inf_mp) and kernel_torus toys
  std::string kernel_kind = "cosine";  // cosine | constant | gaussian_bump
  std::int64_t grid_points = 128;
  double grid_extent = 1.0;
  double kernel_amplitude = 1.0;
  double kernel_frequency = 6.283185307179586476925286766559;  // 2π
  double kernel_width = 0.1;
  std::string g_kind = "zero";  // zero | cosine
  double g_amplitude = 0.0, g_frequency = 1.0, g_phase = 0.0;

  // [init] — grid solvers use kind/centers/kappa; finite solvers may give
  // explicit strategy vectors p/q (empty → uniform).
  std::string init_kind = "uniform";  // uniform | von_mises
  double init_mu_center = 0.3, init_nu_center = 0.7, init_kappa = 1.5;
  std::vector<double> init_p, init_q;

  // [step] — md | mp | inf_md | inf_mp; empty rule → the solver's
  // deterministic formula, or its stochastic one when noise_bound > 0.
  std::string step_rule;
  double fixed_eta = 0.0;
  double noise_bound = 0.0;

  // [schedule] — chain solvers (approx_* | mirror_*)
  SgldSchedule schedule;  // γ₀=1e-2, ε₀=1, growth 1e-5, decays 1e-5/5e-5
  double beta = 0.9;
  std::int64_t batch = 32;      // n
  std::int64_t n_samples = 64;  // n'
  std::string chains = "plain";  // plain | preconditioned (mirror_* only)

  // [toy] — chain-solver problem
  std::string toy_variant = "kernel_torus";  // kernel_torus | dirac_gan
  double x0 = 0.5;
  double confinement = 0.1;
  double real_noise_sd = 0.0;
  std::int64_t diag_bins = 32;

  // [foundations]
  std::int64_t foundations_points = 64;
  double foundations_extent = 1.0;
  std::int64_t trials = 500;

  // [sgld]
  double sgld_gamma = 1e-3;
  double sgld_eps = 1.0;
  std::int64_t sgld_total_steps = 1000000;
  std::int64_t sgld_burn_in = 10000;
  std::int64_t sgld_n_samples = 10000;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_config(ConfigFile& file);
};

// Ordinary least squares of log(gap_ergodic) on log(t) over the recorded
// points with t in [t_min, t_max] and gap > 1e-14. Fewer than 8 usable
// points → indeterminate (a report, not a failure).
struct RateFit {
  bool indeterminate = true;
  double slope = 0.0;
  double intercept = 0.0;  // log gap ≈ intercept + slope·log t
  int points_used = 0;
};

RateFit fit_rate(const std::vector<TraceRecord>& records,
                 std::int64_t t_min = 1,
                 std::int64_t t_max = std::numeric_limits<std::int64_t>::max());

// Per-recorded-point comparison of gap_ergodic against the step rule's
// theoretical bound:
//   md_deterministic:  D̄₀/(ηt) + ηM²/4          slack 1.05
//   md_stochastic:     D̄₀/(ηt) + ηM'²/4         slack 1.2 (expected gap)
//   mp_deterministic:  D̄₀/(ηt)                  slack 1.05
//   mp_stochastic:     D̄₀/(ηt) + (3/2)ησ²       slack 1.2 (expected gap)
// `M` is the recorded sup-norm bound (already M' on stochastic runs).
// Missing (nonpositive) constants for the rule, or a fixed-step rule, are
// configuration errors. Stochastic traces should be seed-averaged first.
struct BoundReport {
  std::vector<bool> per_point;  // aligned with the record vector
  bool overall = true;
  double slack = 1.05;
  double worst_ratio = 0.0;  // max over points of gap / bound (no slack)
};

BoundReport check_bounds(const std::vector<TraceRecord>& records,
                         StepKind kind, double M, double L, double sigma2,
                         double D0_bar);

// Problem builders shared by the harness and the CLI.
MatrixGame make_finite_game(const ExperimentConfig& cfg);
KernelGame make_kernel_game(const ExperimentConfig& cfg);
ToyGame make_toy_game(const ExperimentConfig& cfg);
StepKind resolve_step_kind(const ExperimentConfig& cfg);

// Runs the configured solver for every seed (worker threads, merged in seed
// order), writes one trace CSV per seed plus a JSON summary embedding the
// resolved config, and returns the artifacts. Reports are byte-reproducible:
// wall-clock metadata goes to a separate <label>_meta.json. exit_code is 0,
// or 4 when assert_bounds is set and a bound check failed. Config problems
// throw ConfigError; numerical blow-ups std::runtime_error.
struct RunResult {
  int exit_code = 0;
  bool bounds_checked = false;
  bool bounds_ok = true;
  std::string summary_json;  // exact bytes of the summary artifact
  std::string summary_path;  // empty when out_dir is empty
  std::vector<std::string> trace_paths;  // seed order
};

RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace entroprox
