#include "entroprox/harness.hpp"

#include "entroprox/foundations.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace entroprox {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

// ---------------------------------------------------------------- ConfigFile

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile file;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no),
                          "malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(line_no),
                          "empty section header");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no), "empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!file.values_.emplace(full, value).second) {
      throw ConfigError(full, "duplicate key");
    }
  }
  return file;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool ConfigFile::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string ConfigFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "missing required key");
  consumed_[key] = true;
  return it->second;
}

std::string ConfigFile::get_or(const std::string& key,
                               const std::string& fallback) {
  if (!has(key)) return fallback;
  return get(key);
}

double ConfigFile::get_double(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::int64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<std::uint64_t> ConfigFile::get_seeds(
    const std::string& key, std::vector<std::uint64_t> fallback) {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  std::vector<std::uint64_t> seeds;
  std::string token;
  std::istringstream in(v);
  while (in >> token) {
    while (!token.empty() && token.back() == ',') token.pop_back();
    if (token.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long long x = std::stoull(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      seeds.push_back(static_cast<std::uint64_t>(x));
    } catch (const std::exception&) {
      throw ConfigError(key, "expected unsigned seeds, got '" + token + "'");
    }
  }
  if (seeds.empty()) throw ConfigError(key, "empty seed list");
  return seeds;
}

void ConfigFile::ensure_all_consumed() const {
  for (const auto& [key, value] : values_) {
    (void)value;
    const auto it = consumed_.find(key);
    if (it == consumed_.end() || !it->second) {
      throw ConfigError(key, "unknown configuration key");
    }
  }
}

// ------------------------------------------------------------- solver naming

std::string solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::md: return "md";
    case SolverKind::mp: return "mp";
    case SolverKind::inf_md: return "inf_md";
    case SolverKind::inf_mp: return "inf_mp";
    case SolverKind::approx_md: return "approx_md";
    case SolverKind::approx_mp: return "approx_mp";
    case SolverKind::mirror_gan: return "mirror_gan";
    case SolverKind::mirror_prox_gan: return "mirror_prox_gan";
    case SolverKind::foundations: return "foundations";
    case SolverKind::sgld_check: return "sgld_check";
  }
  throw std::logic_error("solver_kind_name: unreachable");
}

SolverKind parse_solver_kind(const std::string& name) {
  for (const SolverKind kind :
       {SolverKind::md, SolverKind::mp, SolverKind::inf_md, SolverKind::inf_mp,
        SolverKind::approx_md, SolverKind::approx_mp, SolverKind::mirror_gan,
        SolverKind::mirror_prox_gan, SolverKind::foundations,
        SolverKind::sgld_check}) {
    if (solver_kind_name(kind) == name) return kind;
  }
  throw ConfigError("experiment.solver", "unknown solver '" + name + "'");
}

// ------------------------------------------------------ config validation

namespace {

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

bool is_chain_solver(SolverKind kind) {
  return kind == SolverKind::approx_md || kind == SolverKind::approx_mp ||
         kind == SolverKind::mirror_gan || kind == SolverKind::mirror_prox_gan;
}

bool is_trace_solver(SolverKind kind) {
  return kind == SolverKind::md || kind == SolverKind::mp ||
         kind == SolverKind::inf_md || kind == SolverKind::inf_mp;
}

void validate_config(const ExperimentConfig& cfg) {
  require(cfg.T >= 1, "experiment.T", "must be >= 1");
  require(!cfg.seeds.empty(), "experiment.seeds", "must list at least one seed");
  require(cfg.trace_stride >= 0, "experiment.trace_stride", "must be >= 0");
  require(!cfg.label.empty(), "experiment.label", "must be non-empty");

  require(cfg.game_source == "pennies" || cfg.game_source == "random" ||
              cfg.game_source == "file",
          "game.source", "must be pennies|random|file");
  require(cfg.game_m >= 1 && cfg.game_n >= 1, "game.m", "must be >= 1");
  if (cfg.game_source == "file") {
    require(!cfg.game_path.empty(), "game.path", "required for source=file");
  }

  require(cfg.kernel_kind == "cosine" || cfg.kernel_kind == "constant" ||
              cfg.kernel_kind == "gaussian_bump",
          "kernel.kind", "must be cosine|constant|gaussian_bump");
  require(cfg.grid_points >= 1, "kernel.points", "must be >= 1");
  require(cfg.grid_extent > 0.0, "kernel.extent", "must be > 0");
  require(cfg.kernel_width > 0.0, "kernel.width", "must be > 0");
  require(cfg.g_kind == "zero" || cfg.g_kind == "cosine", "g.kind",
          "must be zero|cosine");
  require(cfg.init_kind == "uniform" || cfg.init_kind == "von_mises",
          "init.kind", "must be uniform|von_mises");

  require(cfg.step_rule.empty() || cfg.step_rule == "md_deterministic" ||
              cfg.step_rule == "md_stochastic" ||
              cfg.step_rule == "mp_deterministic" ||
              cfg.step_rule == "mp_stochastic" || cfg.step_rule == "fixed",
          "step.rule",
          "must be md_deterministic|md_stochastic|mp_deterministic|"
          "mp_stochastic|fixed (or omitted)");
  if (cfg.step_rule == "fixed") {
    require(cfg.fixed_eta > 0.0, "step.eta", "required and > 0 for rule=fixed");
  }
  require(cfg.noise_bound >= 0.0, "step.noise_bound", "must be >= 0");
  if (cfg.kind == SolverKind::inf_md || cfg.kind == SolverKind::inf_mp) {
    require(cfg.noise_bound == 0.0, "step.noise_bound",
            "grid solvers are deterministic");
    require(cfg.step_rule != "md_stochastic" && cfg.step_rule != "mp_stochastic",
            "step.rule", "grid solvers are deterministic");
  }

  require(cfg.schedule.gamma0 > 0.0, "schedule.gamma0", "must be > 0");
  require(cfg.schedule.eps0 >= 0.0, "schedule.eps0", "must be >= 0");
  require(cfg.schedule.inner_growth >= 0.0, "schedule.inner_growth",
          "must be >= 0");
  require(cfg.schedule.gamma_decay >= 0.0 && cfg.schedule.gamma_decay < 1.0,
          "schedule.gamma_decay", "must be in [0, 1)");
  require(cfg.schedule.eps_decay >= 0.0 && cfg.schedule.eps_decay < 1.0,
          "schedule.eps_decay", "must be in [0, 1)");
  require(cfg.beta > 0.0 && cfg.beta <= 1.0, "schedule.beta",
          "must be in (0, 1]");
  require(cfg.batch >= 1, "schedule.n", "must be >= 1");
  require(cfg.n_samples >= 1, "schedule.n_samples", "must be >= 1");
  require(cfg.chains == "plain" || cfg.chains == "preconditioned",
          "schedule.chains", "must be plain|preconditioned");

  require(cfg.toy_variant == "kernel_torus" || cfg.toy_variant == "dirac_gan",
          "toy.variant", "must be kernel_torus|dirac_gan");
  if (is_chain_solver(cfg.kind) && cfg.toy_variant == "dirac_gan") {
    require(cfg.confinement > 0.0, "toy.confinement",
            "must be > 0 for dirac_gan");
  }
  if (is_chain_solver(cfg.kind) && cfg.toy_variant == "kernel_torus") {
    require(cfg.kernel_kind != "matrix_lookup", "kernel.kind",
            "chain solvers need an analytic kernel");
  }
  require(cfg.real_noise_sd >= 0.0, "toy.real_noise_sd", "must be >= 0");
  require(cfg.diag_bins >= 1, "toy.diag_bins", "must be >= 1");

  require(cfg.foundations_points >= 2, "foundations.points", "must be >= 2");
  require(cfg.foundations_extent > 0.0, "foundations.extent", "must be > 0");
  require(cfg.trials >= 1, "foundations.trials", "must be >= 1");

  require(cfg.sgld_gamma > 0.0, "sgld.gamma", "must be > 0");
  require(cfg.sgld_eps > 0.0, "sgld.eps", "must be > 0");
  require(cfg.sgld_total_steps >= 1, "sgld.total_steps", "must be >= 1");
  require(cfg.sgld_burn_in >= 0 && cfg.sgld_burn_in < cfg.sgld_total_steps,
          "sgld.burn_in", "must be in [0, total_steps)");
  require(cfg.sgld_n_samples >= 1 &&
              cfg.sgld_n_samples <= cfg.sgld_total_steps - cfg.sgld_burn_in,
          "sgld.n_samples", "must be in [1, total_steps - burn_in]");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(ConfigFile& file) {
  ExperimentConfig cfg;
  cfg.kind = parse_solver_kind(file.get_or("experiment.solver", "md"));
  cfg.label = file.get_or("experiment.label", solver_kind_name(cfg.kind));
  cfg.T = file.get_int("experiment.T", cfg.T);
  cfg.seeds = file.get_seeds("experiment.seeds", cfg.seeds);
  cfg.trace_stride = file.get_int("experiment.trace_stride", cfg.trace_stride);
  cfg.assert_bounds = file.get_bool("experiment.assert_bounds",
                                    cfg.assert_bounds);
  cfg.out_dir = file.get_or("experiment.out", cfg.out_dir);

  cfg.game_source = file.get_or("game.source", cfg.game_source);
  cfg.game_m = file.get_int("game.m", cfg.game_m);
  cfg.game_n = file.get_int("game.n", cfg.game_n);
  cfg.game_seed = static_cast<std::uint64_t>(
      file.get_int("game.seed", static_cast<std::int64_t>(cfg.game_seed)));
  cfg.game_path = file.get_or("game.path", cfg.game_path);

  cfg.kernel_kind = file.get_or("kernel.kind", cfg.kernel_kind);
  cfg.grid_points = file.get_int("kernel.points", cfg.grid_points);
  cfg.grid_extent = file.get_double("kernel.extent", cfg.grid_extent);
  cfg.kernel_amplitude =
      file.get_double("kernel.amplitude", cfg.kernel_amplitude);
  cfg.kernel_frequency =
      file.get_double("kernel.frequency", cfg.kernel_frequency);
  cfg.kernel_width = file.get_double("kernel.width", cfg.kernel_width);

  cfg.g_kind = file.get_or("g.kind", cfg.g_kind);
  cfg.g_amplitude = file.get_double("g.amplitude", cfg.g_amplitude);
  cfg.g_frequency = file.get_double("g.frequency", cfg.g_frequency);
  cfg.g_phase = file.get_double("g.phase", cfg.g_phase);

  cfg.init_kind = file.get_or("init.kind", cfg.init_kind);
  cfg.init_mu_center = file.get_double("init.mu_center", cfg.init_mu_center);
  cfg.init_nu_center = file.get_double("init.nu_center", cfg.init_nu_center);
  cfg.init_kappa = file.get_double("init.kappa", cfg.init_kappa);
  const auto parse_doubles = [&file](const std::string& key) {
    std::vector<double> xs;
    std::istringstream in(file.get_or(key, ""));
    std::string token;
    while (in >> token) {
      while (!token.empty() && token.back() == ',') token.pop_back();
      if (token.empty()) continue;
      try {
        std::size_t used = 0;
        xs.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ConfigError(key, "expected real entries, got '" + token + "'");
      }
    }
    return xs;
  };
  cfg.init_p = parse_doubles("init.p");
  cfg.init_q = parse_doubles("init.q");

  cfg.step_rule = file.get_or("step.rule", cfg.step_rule);
  cfg.fixed_eta = file.get_double("step.eta", cfg.fixed_eta);
  cfg.noise_bound = file.get_double("step.noise_bound", cfg.noise_bound);

  cfg.schedule.gamma0 = file.get_double("schedule.gamma0", cfg.schedule.gamma0);
  cfg.schedule.eps0 = file.get_double("schedule.eps0", cfg.schedule.eps0);
  cfg.schedule.inner_growth =
      file.get_double("schedule.inner_growth", cfg.schedule.inner_growth);
  cfg.schedule.gamma_decay =
      file.get_double("schedule.gamma_decay", cfg.schedule.gamma_decay);
  cfg.schedule.eps_decay =
      file.get_double("schedule.eps_decay", cfg.schedule.eps_decay);
  cfg.beta = file.get_double("schedule.beta", cfg.beta);
  cfg.batch = file.get_int("schedule.n", cfg.batch);
  cfg.n_samples = file.get_int("schedule.n_samples", cfg.n_samples);
  cfg.chains = file.get_or("schedule.chains", cfg.chains);

  cfg.toy_variant = file.get_or("toy.variant", cfg.toy_variant);
  cfg.x0 = file.get_double("toy.x0", cfg.x0);
  cfg.confinement = file.get_double("toy.confinement", cfg.confinement);
  cfg.real_noise_sd = file.get_double("toy.real_noise_sd", cfg.real_noise_sd);
  cfg.diag_bins = file.get_int("toy.diag_bins", cfg.diag_bins);

  cfg.foundations_points =
      file.get_int("foundations.points", cfg.foundations_points);
  cfg.foundations_extent =
      file.get_double("foundations.extent", cfg.foundations_extent);
  cfg.trials = file.get_int("foundations.trials", cfg.trials);

  cfg.sgld_gamma = file.get_double("sgld.gamma", cfg.sgld_gamma);
  cfg.sgld_eps = file.get_double("sgld.eps", cfg.sgld_eps);
  cfg.sgld_total_steps =
      file.get_int("sgld.total_steps", cfg.sgld_total_steps);
  cfg.sgld_burn_in = file.get_int("sgld.burn_in", cfg.sgld_burn_in);
  cfg.sgld_n_samples = file.get_int("sgld.n_samples", cfg.sgld_n_samples);

  file.ensure_all_consumed();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  ConfigFile file = ConfigFile::parse_file(path);
  return from_config(file);
}

// ------------------------------------------------------------------ fit_rate

RateFit fit_rate(const std::vector<TraceRecord>& records, std::int64_t t_min,
                 std::int64_t t_max) {
  std::vector<double> xs, ys;
  for (const TraceRecord& r : records) {
    if (r.t < t_min || r.t > t_max) continue;
    if (!(r.gap_ergodic > 1e-14)) continue;
    xs.push_back(std::log(static_cast<double>(r.t)));
    ys.push_back(std::log(r.gap_ergodic));
  }
  RateFit fit;
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 8) return fit;  // indeterminate by contract
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) return fit;  // all points at one t: no slope
  fit.indeterminate = false;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

// -------------------------------------------------------------- check_bounds

BoundReport check_bounds(const std::vector<TraceRecord>& records,
                         StepKind kind, double M, double L, double sigma2,
                         double D0_bar) {
  if (records.empty()) {
    throw std::invalid_argument("check_bounds: empty trace");
  }
  const bool stochastic =
      kind == StepKind::md_stochastic || kind == StepKind::mp_stochastic;
  switch (kind) {
    case StepKind::md_deterministic:
    case StepKind::md_stochastic:
      if (!(M > 0.0)) throw ConfigError("step.rule", "bound needs M > 0");
      if (!(D0_bar > 0.0)) {
        throw ConfigError("step.rule", "bound needs D0_bar > 0");
      }
      break;
    case StepKind::mp_deterministic:
    case StepKind::mp_stochastic:
      if (!(L > 0.0)) throw ConfigError("step.rule", "bound needs L > 0");
      if (!(D0_bar > 0.0)) {
        throw ConfigError("step.rule", "bound needs D0_bar > 0");
      }
      if (kind == StepKind::mp_stochastic && !(sigma2 > 0.0)) {
        throw ConfigError("step.rule", "bound needs sigma2 > 0");
      }
      break;
    case StepKind::fixed:
      throw ConfigError("step.rule",
                        "no theoretical bound for a fixed step size");
  }

  BoundReport report;
  report.slack = stochastic ? 1.2 : 1.05;
  report.per_point.reserve(records.size());
  for (const TraceRecord& r : records) {
    const double td = static_cast<double>(r.t);
    double bound = 0.0;
    switch (kind) {
      case StepKind::md_deterministic:
      case StepKind::md_stochastic:
        bound = D0_bar / (r.eta * td) + r.eta * M * M / 4.0;
        break;
      case StepKind::mp_deterministic:
        if (r.eta > 4.0 / L + 1e-12) {
          throw ConfigError("step.rule",
                            "mirror-prox bound needs eta <= 4/L");
        }
        bound = D0_bar / (r.eta * td);
        break;
      case StepKind::mp_stochastic:
        bound = D0_bar / (r.eta * td) + 1.5 * r.eta * sigma2;
        break;
      case StepKind::fixed:
        break;  // unreachable
    }
    const bool ok = r.gap_ergodic <= report.slack * bound;
    report.per_point.push_back(ok);
    report.overall = report.overall && ok;
    if (bound > 0.0) {
      report.worst_ratio = std::max(report.worst_ratio, r.gap_ergodic / bound);
    }
  }
  return report;
}

// ---------------------------------------------------------- problem builders

MatrixGame make_finite_game(const ExperimentConfig& cfg) {
  if (cfg.game_source == "pennies") return matching_pennies();
  if (cfg.game_source == "random") {
    rng::Stream stream(cfg.game_seed);
    return random_game(cfg.game_m, cfg.game_n, stream);
  }
  try {
    return load_game(cfg.game_path);
  } catch (const std::exception& e) {
    throw ConfigError("game.path", e.what());
  }
}

KernelGame make_kernel_game(const ExperimentConfig& cfg) {
  const GridDomain dom(1, cfg.grid_points, cfg.grid_extent);
  Kernel kernel = Kernel::constant(cfg.kernel_amplitude);
  if (cfg.kernel_kind == "cosine") {
    kernel = Kernel::cosine(cfg.kernel_amplitude, cfg.kernel_frequency);
  } else if (cfg.kernel_kind == "gaussian_bump") {
    kernel = Kernel::gaussian_bump(cfg.kernel_amplitude, cfg.kernel_width);
  }
  GFunc g = GFunc::zero();
  if (cfg.g_kind == "cosine") {
    g = GFunc::cosine(cfg.g_amplitude, cfg.g_frequency, cfg.g_phase);
  }
  return KernelGame(dom, dom, kernel, g);
}

ToyGame make_toy_game(const ExperimentConfig& cfg) {
  ToyGame toy =
      cfg.toy_variant == "dirac_gan"
          ? ToyGame::make_dirac_gan(cfg.x0, cfg.confinement,
                                    static_cast<int>(cfg.batch),
                                    static_cast<int>(cfg.n_samples),
                                    cfg.real_noise_sd)
          : ToyGame::make_kernel_torus(make_kernel_game(cfg),
                                       static_cast<int>(cfg.batch),
                                       static_cast<int>(cfg.n_samples));
  toy.diag_bins = static_cast<int>(cfg.diag_bins);
  return toy;
}

StepKind resolve_step_kind(const ExperimentConfig& cfg) {
  if (cfg.step_rule == "md_deterministic") return StepKind::md_deterministic;
  if (cfg.step_rule == "md_stochastic") return StepKind::md_stochastic;
  if (cfg.step_rule == "mp_deterministic") return StepKind::mp_deterministic;
  if (cfg.step_rule == "mp_stochastic") return StepKind::mp_stochastic;
  if (cfg.step_rule == "fixed") return StepKind::fixed;
  const bool noisy = cfg.noise_bound > 0.0;
  if (cfg.kind == SolverKind::md || cfg.kind == SolverKind::inf_md) {
    return noisy ? StepKind::md_stochastic : StepKind::md_deterministic;
  }
  return noisy ? StepKind::mp_stochastic : StepKind::mp_deterministic;
}

// ------------------------------------------------------------ run_experiment

namespace {

StepSizeRule build_rule(const ExperimentConfig& cfg, double M, double L,
                        double D0_bar) {
  switch (resolve_step_kind(cfg)) {
    case StepKind::md_deterministic:
      return StepSizeRule::md_deterministic(M, D0_bar);
    case StepKind::md_stochastic:
      return StepSizeRule::md_stochastic(M + cfg.noise_bound, D0_bar);
    case StepKind::mp_deterministic:
      return StepSizeRule::mp_deterministic(L);
    case StepKind::mp_stochastic:
      return StepSizeRule::mp_stochastic(
          L, cfg.noise_bound * cfg.noise_bound / 3.0, D0_bar);
    case StepKind::fixed:
      return StepSizeRule::fixed_step(cfg.fixed_eta);
  }
  throw std::logic_error("build_rule: unreachable");
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  // The output directory is deliberately not echoed: the report describes
  // the experiment, so reruns into different directories stay byte-equal.
  j["experiment"] = {{"solver", solver_kind_name(cfg.kind)},
                     {"label", cfg.label},
                     {"T", cfg.T},
                     {"seeds", cfg.seeds},
                     {"trace_stride", cfg.trace_stride},
                     {"assert_bounds", cfg.assert_bounds}};
  j["game"] = {{"source", cfg.game_source},
               {"m", cfg.game_m},
               {"n", cfg.game_n},
               {"seed", cfg.game_seed},
               {"path", cfg.game_path}};
  j["kernel"] = {{"kind", cfg.kernel_kind},
                 {"points", cfg.grid_points},
                 {"extent", cfg.grid_extent},
                 {"amplitude", cfg.kernel_amplitude},
                 {"frequency", cfg.kernel_frequency},
                 {"width", cfg.kernel_width}};
  j["g"] = {{"kind", cfg.g_kind},
            {"amplitude", cfg.g_amplitude},
            {"frequency", cfg.g_frequency},
            {"phase", cfg.g_phase}};
  j["init"] = {{"kind", cfg.init_kind},
               {"mu_center", cfg.init_mu_center},
               {"nu_center", cfg.init_nu_center},
               {"kappa", cfg.init_kappa},
               {"p", cfg.init_p},
               {"q", cfg.init_q}};
  j["step"] = {{"rule", cfg.step_rule.empty()
                            ? std::string("(auto)")
                            : cfg.step_rule},
               {"resolved_rule",
                [&] {
                  switch (resolve_step_kind(cfg)) {
                    case StepKind::md_deterministic:
                      return "md_deterministic";
                    case StepKind::md_stochastic: return "md_stochastic";
                    case StepKind::mp_deterministic:
                      return "mp_deterministic";
                    case StepKind::mp_stochastic: return "mp_stochastic";
                    case StepKind::fixed: return "fixed";
                  }
                  return "fixed";
                }()},
               {"eta", cfg.fixed_eta},
               {"noise_bound", cfg.noise_bound}};
  j["schedule"] = {{"gamma0", cfg.schedule.gamma0},
                   {"eps0", cfg.schedule.eps0},
                   {"inner_growth", cfg.schedule.inner_growth},
                   {"gamma_decay", cfg.schedule.gamma_decay},
                   {"eps_decay", cfg.schedule.eps_decay},
                   {"beta", cfg.beta},
                   {"n", cfg.batch},
                   {"n_samples", cfg.n_samples},
                   {"chains", cfg.chains}};
  j["toy"] = {{"variant", cfg.toy_variant},
              {"x0", cfg.x0},
              {"confinement", cfg.confinement},
              {"real_noise_sd", cfg.real_noise_sd},
              {"diag_bins", cfg.diag_bins}};
  j["foundations"] = {{"points", cfg.foundations_points},
                      {"extent", cfg.foundations_extent},
                      {"trials", cfg.trials}};
  j["sgld"] = {{"gamma", cfg.sgld_gamma},
               {"eps", cfg.sgld_eps},
               {"total_steps", cfg.sgld_total_steps},
               {"burn_in", cfg.sgld_burn_in},
               {"n_samples", cfg.sgld_n_samples}};
  return j;
}

json rate_json(const RateFit& fit) {
  return {{"indeterminate", fit.indeterminate},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"points_used", fit.points_used}};
}

json bounds_json(const BoundReport& report,
                 const std::vector<TraceRecord>& records) {
  json failures = json::array();
  for (std::size_t i = 0; i < report.per_point.size(); ++i) {
    if (!report.per_point[i]) failures.push_back(records[i].t);
  }
  return {{"overall", report.overall},
          {"slack", report.slack},
          {"worst_ratio", report.worst_ratio},
          {"failing_t", failures}};
}

void write_records_csv(const std::vector<TraceRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file " + path);
  out << std::setprecision(17);
  out << "t,gap_ergodic,gap_last,eta\n";
  for (const TraceRecord& r : records) {
    out << r.t << ',' << r.gap_ergodic << ',' << r.gap_last << ',' << r.eta
        << '\n';
  }
}

void write_items_csv(const FoundationsReport& report,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file " + path);
  out << std::setprecision(17);
  out << "item,worst_residual,worst_margin,violations,pass\n";
  for (const ItemResult& item : report.items) {
    out << item.key << ',' << item.worst_residual << ',' << item.worst_margin
        << ',' << item.violations << ',' << (item.pass ? 1 : 0) << '\n';
  }
}

void write_samples_csv(const std::vector<double>& samples,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file " + path);
  out << std::setprecision(17);
  out << "sample\n";
  for (const double x : samples) out << x << '\n';
}

// Per-seed payload returned by a worker: the seed's JSON summary plus the
// records (kept for seed-averaged bound checks on stochastic runs).
struct SeedOutcome {
  json summary;
  std::vector<TraceRecord> records;
  bool bounds_checked = false;
  bool bounds_ok = true;
};

SeedOutcome run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                         const std::string& trace_path) {
  SeedOutcome outcome;
  outcome.summary["seed"] = seed;
  if (!trace_path.empty()) {
    outcome.summary["trace_csv"] =
        trace_path.substr(trace_path.find_last_of('/') + 1);
  }
  const bool write = !trace_path.empty();
  const StepKind step_kind =
      is_trace_solver(cfg.kind) ? resolve_step_kind(cfg) : StepKind::fixed;

  switch (cfg.kind) {
    case SolverKind::md:
    case SolverKind::mp: {
      const MatrixGame game = make_finite_game(cfg);
      const double D0 = std::log(static_cast<double>(game.m())) +
                        std::log(static_cast<double>(game.n()));
      const StepSizeRule rule =
          build_rule(cfg, game.grad_bound(), game.smoothness_bound(), D0);
      SolveOptions opts;
      opts.trace_stride = cfg.trace_stride;
      if (cfg.noise_bound > 0.0) {
        opts.oracle = StochasticOracleConfig{cfg.noise_bound, seed};
      }
      const auto to_simplex = [](const std::vector<double>& entries,
                                 Eigen::Index dim, const char* key) {
        if (entries.empty()) return SimplexVector::uniform(dim);
        if (static_cast<Eigen::Index>(entries.size()) != dim) {
          throw ConfigError(key, "length must match the game dimension");
        }
        try {
          return SimplexVector(
              Eigen::Map<const Vec>(entries.data(), dim));
        } catch (const std::domain_error& e) {
          throw ConfigError(key, e.what());
        }
      };
      const SimplexVector p0 = to_simplex(cfg.init_p, game.n(), "init.p");
      const SimplexVector q0 = to_simplex(cfg.init_q, game.m(), "init.q");
      const ProxTrace trace = cfg.kind == SolverKind::md
                                  ? solve_md(game, cfg.T, rule, opts, p0, q0)
                                  : solve_mp(game, cfg.T, rule, opts, p0, q0);
      if (write) write_records_csv(trace.records, trace_path);
      outcome.records = trace.records;
      outcome.summary["eta"] = trace.eta;
      outcome.summary["M"] = trace.M;
      outcome.summary["L"] = trace.L;
      outcome.summary["D0_bar"] = trace.D0_bar;
      outcome.summary["sigma2"] = trace.sigma2;
      outcome.summary["records"] = trace.records.size();
      outcome.summary["final_gap_ergodic"] = trace.records.back().gap_ergodic;
      outcome.summary["final_gap_last"] = trace.records.back().gap_last;
      outcome.summary["rate"] = rate_json(fit_rate(trace.records));
      if (step_kind == StepKind::md_deterministic ||
          step_kind == StepKind::mp_deterministic) {
        const BoundReport bounds =
            check_bounds(trace.records, step_kind, trace.M, trace.L,
                         trace.sigma2, trace.D0_bar);
        outcome.summary["bounds"] = bounds_json(bounds, trace.records);
        outcome.bounds_checked = true;
        outcome.bounds_ok = bounds.overall;
      }
      break;
    }
    case SolverKind::inf_md:
    case SolverKind::inf_mp: {
      const KernelGame game = make_kernel_game(cfg);
      const double D0 =
          std::log(static_cast<double>(game.dom_w().cells())) +
          std::log(static_cast<double>(game.dom_th().cells()));
      const StepSizeRule rule =
          build_rule(cfg, game.grad_bound(), game.smoothness_bound(), D0);
      GridDensity mu0 = GridDensity::uniform(game.dom_w());
      GridDensity nu0 = GridDensity::uniform(game.dom_th());
      if (cfg.init_kind == "von_mises") {
        mu0 = GridDensity::von_mises(game.dom_w(), cfg.init_mu_center,
                                     cfg.init_kappa);
        nu0 = GridDensity::von_mises(game.dom_th(), cfg.init_nu_center,
                                     cfg.init_kappa);
      }
      const GridTrace trace =
          cfg.kind == SolverKind::inf_md
              ? solve_inf_md(game, cfg.T, rule, mu0, nu0, cfg.trace_stride)
              : solve_inf_mp(game, cfg.T, rule, mu0, nu0, cfg.trace_stride);
      if (write) write_records_csv(trace.records, trace_path);
      outcome.records = trace.records;
      outcome.summary["eta"] = trace.eta;
      outcome.summary["M"] = trace.M;
      outcome.summary["L"] = trace.L;
      outcome.summary["D0_bar"] = trace.D0_bar;
      outcome.summary["sigma2"] = trace.sigma2;
      outcome.summary["records"] = trace.records.size();
      outcome.summary["final_gap_ergodic"] = trace.records.back().gap_ergodic;
      outcome.summary["final_gap_last"] = trace.records.back().gap_last;
      outcome.summary["rate"] = rate_json(fit_rate(trace.records));
      if (step_kind == StepKind::md_deterministic ||
          step_kind == StepKind::mp_deterministic) {
        const BoundReport bounds =
            check_bounds(trace.records, step_kind, trace.M, trace.L,
                         trace.sigma2, trace.D0_bar);
        outcome.summary["bounds"] = bounds_json(bounds, trace.records);
        outcome.bounds_checked = true;
        outcome.bounds_ok = bounds.overall;
      }
      break;
    }
    case SolverKind::approx_md:
    case SolverKind::approx_mp: {
      const ToyGame toy = make_toy_game(cfg);
      const EnsembleRun run =
          cfg.kind == SolverKind::approx_md
              ? approx_inf_md(toy, cfg.T, cfg.schedule,
                              static_cast<int>(cfg.batch),
                              static_cast<int>(cfg.n_samples), seed)
              : approx_inf_mp(toy, cfg.T, cfg.schedule,
                              static_cast<int>(cfg.batch),
                              static_cast<int>(cfg.n_samples), seed);
      if (write) save_particle_trace_csv(run, trace_path);
      outcome.summary["generations"] = run.w_gens.size();
      outcome.summary["sampled_index"] = run.sampled_index;
      outcome.summary["final_diagnostic"] = run.diagnostics.back();
      outcome.summary["derivative_evals"] = run.derivative_evals;
      outcome.summary["stored_particles"] = run.stored_particles;
      outcome.summary["peak_union_size"] = run.peak_union_size;
      break;
    }
    case SolverKind::mirror_gan:
    case SolverKind::mirror_prox_gan: {
      const ToyGame toy = make_toy_game(cfg);
      const ChainKind chains = cfg.chains == "preconditioned"
                                   ? ChainKind::preconditioned
                                   : ChainKind::plain;
      const GanRun run =
          cfg.kind == SolverKind::mirror_gan
              ? mirror_gan(toy, cfg.T, cfg.schedule, cfg.beta,
                           static_cast<int>(cfg.batch), seed, chains)
              : mirror_prox_gan(toy, cfg.T, cfg.schedule, cfg.beta,
                                static_cast<int>(cfg.batch), seed, chains);
      if (write) save_gan_trace_csv(run, trace_path);
      outcome.summary["w_final"] = run.w_final;
      outcome.summary["theta_final"] = run.theta_final;
      outcome.summary["final_diagnostic"] = run.diagnostics.back();
      outcome.summary["derivative_evals"] = run.derivative_evals;
      break;
    }
    case SolverKind::foundations: {
      const GridDomain dom(1, cfg.foundations_points, cfg.foundations_extent);
      const FoundationsReport report =
          foundations_suite(dom, static_cast<int>(cfg.trials), seed);
      if (write) write_items_csv(report, trace_path);
      json items = json::array();
      for (const ItemResult& item : report.items) {
        items.push_back({{"item", item.key},
                         {"description", item.description},
                         {"worst_residual", item.worst_residual},
                         {"worst_margin", item.worst_margin},
                         {"has_inequality", item.has_inequality},
                         {"violations", item.violations},
                         {"pass", item.pass}});
      }
      outcome.summary["items"] = items;
      outcome.summary["trials"] = report.trials;
      outcome.summary["identity_tol"] = report.identity_tol;
      outcome.summary["slack"] = report.slack;
      outcome.summary["all_pass"] = report.all_pass();
      break;
    }
    case SolverKind::sgld_check: {
      const GaussianChainResult res = unit_gaussian_chain_check(
          cfg.sgld_total_steps, cfg.sgld_burn_in, cfg.sgld_n_samples,
          cfg.sgld_gamma, cfg.sgld_eps, seed);
      if (write) write_samples_csv(res.samples, trace_path);
      outcome.summary["mean"] = res.mean;
      outcome.summary["variance"] = res.variance;
      outcome.summary["ks"] = res.ks;
      outcome.summary["ks_critical_1pct"] = res.ks_critical_1pct;
      outcome.summary["ks_ok"] = res.ks < res.ks_critical_1pct;
      break;
    }
  }
  return outcome;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto t_start = std::chrono::steady_clock::now();

  // One worker per seed; distinct output files; merged in seed order.
  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<std::string> trace_paths(n_seeds);
  for (std::size_t i = 0; i < n_seeds; ++i) {
    if (cfg.out_dir.empty()) continue;
    const std::string stem =
        n_seeds == 1 ? cfg.label
                     : cfg.label + "_seed" + std::to_string(cfg.seeds[i]);
    trace_paths[i] = cfg.out_dir + "/" + stem + "_trace.csv";
  }

  std::vector<SeedOutcome> outcomes(n_seeds);
  std::vector<std::exception_ptr> errors(n_seeds);
  if (n_seeds == 1) {
    outcomes[0] = run_one_seed(cfg, cfg.seeds[0], trace_paths[0]);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(n_seeds);
    for (std::size_t i = 0; i < n_seeds; ++i) {
      workers.emplace_back([&, i] {
        try {
          outcomes[i] = run_one_seed(cfg, cfg.seeds[i], trace_paths[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (std::thread& w : workers) w.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  RunResult result;
  json summary;
  summary["config"] = config_json(cfg);

  // Stochastic runs are judged on the expected gap: average the per-seed
  // traces pointwise (identical record grids) and bound-check the mean.
  if (is_trace_solver(cfg.kind)) {
    const StepKind step_kind = resolve_step_kind(cfg);
    if (step_kind == StepKind::md_stochastic ||
        step_kind == StepKind::mp_stochastic) {
      std::vector<TraceRecord> mean = outcomes[0].records;
      for (std::size_t s = 1; s < n_seeds; ++s) {
        const auto& records = outcomes[s].records;
        if (records.size() != mean.size()) {
          throw std::runtime_error("seed traces disagree on record grid");
        }
        for (std::size_t i = 0; i < mean.size(); ++i) {
          mean[i].gap_ergodic += records[i].gap_ergodic;
          mean[i].gap_last += records[i].gap_last;
        }
      }
      for (TraceRecord& r : mean) {
        r.gap_ergodic /= static_cast<double>(n_seeds);
        r.gap_last /= static_cast<double>(n_seeds);
      }
      const double M = outcomes[0].summary["M"].get<double>();
      const double L = outcomes[0].summary["L"].get<double>();
      const double sigma2 = outcomes[0].summary["sigma2"].get<double>();
      const double D0 = outcomes[0].summary["D0_bar"].get<double>();
      const BoundReport bounds =
          check_bounds(mean, step_kind, M, L, sigma2, D0);
      const double bound_at_T =
          step_kind == StepKind::md_stochastic
              ? md_stochastic_gap_bound(M, D0, cfg.T)
              : mp_stochastic_gap_bound(L, sigma2, D0, cfg.T);
      summary["aggregate"] = {
          {"seeds_averaged", n_seeds},
          {"mean_final_gap_ergodic", mean.back().gap_ergodic},
          {"bound_at_T", bound_at_T},
          {"bounds", bounds_json(bounds, mean)},
          {"rate", rate_json(fit_rate(mean))}};
      result.bounds_checked = true;
      result.bounds_ok = bounds.overall;
    }
  }

  json seeds = json::array();
  for (SeedOutcome& outcome : outcomes) {
    seeds.push_back(std::move(outcome.summary));
    result.bounds_checked = result.bounds_checked || outcome.bounds_checked;
    result.bounds_ok = result.bounds_ok && outcome.bounds_ok;
  }
  summary["seeds"] = std::move(seeds);

  result.summary_json = summary.dump(2) + "\n";
  for (const std::string& p : trace_paths) {
    if (!p.empty()) result.trace_paths.push_back(p);
  }
  if (!cfg.out_dir.empty()) {
    result.summary_path = cfg.out_dir + "/" + cfg.label + "_summary.json";
    std::ofstream out(result.summary_path);
    if (!out) {
      throw std::runtime_error("cannot open summary file " +
                               result.summary_path);
    }
    out << result.summary_json;
    out.close();
    // Wall-clock facts live apart from the byte-reproducible report.
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    json meta = {{"elapsed_seconds", elapsed},
                 {"written_unix_seconds",
                  std::chrono::duration_cast<std::chrono::seconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count()}};
    std::ofstream meta_out(cfg.out_dir + "/" + cfg.label + "_meta.json");
    if (meta_out) meta_out << meta.dump(2) << "\n";
  }

  if (cfg.assert_bounds && result.bounds_checked && !result.bounds_ok) {
    result.exit_code = 4;
  }
  return result;
}

}  // namespace entroprox
