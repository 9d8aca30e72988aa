// Python bindings for the core operations: the entropic mirror step, the
// finite-game duality gap and solvers, rate fitting, the property suite,
// the Langevin chain check, and the full config-driven experiment runner
// (which reaches every solver the CLI can run).

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "entroprox/foundations.hpp"
#include "entroprox/harness.hpp"
#include "entroprox/matrix_game.hpp"
#include "entroprox/prox_finite.hpp"
#include "entroprox/sgld.hpp"
#include "entroprox/simplex.hpp"

namespace py = pybind11;
using namespace entroprox;

namespace {

StepSizeRule rule_for(const MatrixGame& game, const std::string& name,
                      double eta, double noise_bound, std::int64_t /*T*/) {
  const double D0 = std::log(static_cast<double>(game.m())) +
                    std::log(static_cast<double>(game.n()));
  const double M = game.grad_bound();
  const double L = game.smoothness_bound();
  if (name == "md_deterministic") return StepSizeRule::md_deterministic(M, D0);
  if (name == "md_stochastic")
    return StepSizeRule::md_stochastic(M + noise_bound, D0);
  if (name == "mp_deterministic") return StepSizeRule::mp_deterministic(L);
  if (name == "mp_stochastic")
    return StepSizeRule::mp_stochastic(L, noise_bound * noise_bound / 3.0, D0);
  if (name == "fixed") return StepSizeRule::fixed_step(eta);
  throw std::invalid_argument("unknown step rule: " + name);
}

py::dict trace_to_dict(const ProxTrace& trace) {
  const auto k = trace.records.size();
  std::vector<std::int64_t> t(k);
  std::vector<double> ge(k), gl(k), etas(k);
  for (std::size_t i = 0; i < k; ++i) {
    t[i] = trace.records[i].t;
    ge[i] = trace.records[i].gap_ergodic;
    gl[i] = trace.records[i].gap_last;
    etas[i] = trace.records[i].eta;
  }
  py::dict d;
  d["t"] = py::array_t<std::int64_t>(py::ssize_t(k), t.data());
  d["gap_ergodic"] = py::array_t<double>(py::ssize_t(k), ge.data());
  d["gap_last"] = py::array_t<double>(py::ssize_t(k), gl.data());
  d["eta_t"] = py::array_t<double>(py::ssize_t(k), etas.data());
  d["p_bar"] = trace.p_bar;
  d["q_bar"] = trace.q_bar;
  d["p_last"] = trace.p_last;
  d["q_last"] = trace.q_last;
  d["eta"] = trace.eta;
  d["T"] = trace.T;
  d["M"] = trace.M;
  d["L"] = trace.L;
  d["D0_bar"] = trace.D0_bar;
  d["sigma2"] = trace.sigma2;
  return d;
}

py::dict solve_matrix_game(const Eigen::MatrixXd& A, const Vec& a,
                           std::int64_t T, const std::string& method,
                           std::string step_rule, double eta,
                           double noise_bound, std::uint64_t seed,
                           std::optional<Vec> p0, std::optional<Vec> q0,
                           std::int64_t trace_stride) {
  const MatrixGame game(A, a);
  const bool mirror_prox = method == "mp";
  if (!mirror_prox && method != "md") {
    throw std::invalid_argument("method must be 'md' or 'mp'");
  }
  if (step_rule.empty()) {
    step_rule = mirror_prox
                    ? (noise_bound > 0.0 ? "mp_stochastic" : "mp_deterministic")
                    : (noise_bound > 0.0 ? "md_stochastic" : "md_deterministic");
  }
  const StepSizeRule rule = rule_for(game, step_rule, eta, noise_bound, T);
  SolveOptions opts;
  opts.trace_stride = trace_stride;
  if (noise_bound > 0.0) opts.oracle = StochasticOracleConfig{noise_bound, seed};
  const SimplexVector sp0 = p0 ? SimplexVector(*p0) : SimplexVector::uniform(game.n());
  const SimplexVector sq0 = q0 ? SimplexVector(*q0) : SimplexVector::uniform(game.m());
  const ProxTrace trace = mirror_prox ? solve_mp(game, T, rule, opts, sp0, sq0)
                                      : solve_md(game, T, rule, opts, sp0, sq0);
  py::dict d = trace_to_dict(trace);
  d["step_rule"] = step_rule;
  return d;
}

py::dict fit_rate_py(const std::vector<std::int64_t>& t,
                     const std::vector<double>& gap, std::int64_t t_min,
                     std::int64_t t_max) {
  if (t.size() != gap.size()) {
    throw std::invalid_argument("t and gap must have equal length");
  }
  std::vector<TraceRecord> records(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    records[i] = TraceRecord{t[i], gap[i], gap[i], 0.0};
  }
  const RateFit fit = fit_rate(records, t_min, t_max);
  py::dict d;
  d["slope"] = fit.slope;
  d["intercept"] = fit.intercept;
  d["points_used"] = fit.points_used;
  d["indeterminate"] = fit.indeterminate;
  return d;
}

py::dict run_config(const std::string& text, std::optional<std::string> out,
                    std::optional<std::uint64_t> seed,
                    std::optional<std::int64_t> trace_stride,
                    std::optional<bool> assert_bounds) {
  ConfigFile file = ConfigFile::parse_string(text);
  ExperimentConfig cfg = ExperimentConfig::from_config(file);
  if (out) cfg.out_dir = *out;
  if (seed) cfg.seeds = {*seed};
  if (trace_stride) cfg.trace_stride = *trace_stride;
  if (assert_bounds) cfg.assert_bounds = *assert_bounds;
  const RunResult result = run_experiment(cfg);
  py::dict d;
  d["exit_code"] = result.exit_code;
  d["bounds_checked"] = result.bounds_checked;
  d["bounds_ok"] = result.bounds_ok;
  d["summary_json"] = result.summary_json;
  d["summary_path"] = result.summary_path;
  d["trace_paths"] = result.trace_paths;
  return d;
}

py::list foundations_report(int points, double extent, int trials,
                            std::uint64_t seed) {
  const FoundationsReport report =
      foundations_suite(GridDomain(1, points, extent), trials, seed);
  py::list items;
  for (const ItemResult& item : report.items) {
    py::dict d;
    d["key"] = item.key;
    d["description"] = item.description;
    d["worst_residual"] = item.worst_residual;
    d["worst_margin"] = item.worst_margin;
    d["has_inequality"] = item.has_inequality;
    d["violations"] = item.violations;
    d["pass"] = item.pass;
    items.append(d);
  }
  return items;
}

py::dict gaussian_chain_check(std::int64_t total_steps, std::int64_t burn_in,
                              std::int64_t n_samples, double gamma, double eps,
                              std::uint64_t seed) {
  const GaussianChainResult res =
      unit_gaussian_chain_check(total_steps, burn_in, n_samples, gamma, eps,
                                seed);
  py::dict d;
  d["mean"] = res.mean;
  d["variance"] = res.variance;
  d["ks"] = res.ks;
  d["ks_critical_1pct"] = res.ks_critical_1pct;
  d["samples"] = res.samples;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Entropic mirror-descent solvers for two-player zero-sum games, with "
      "bound checks, a mirror-map property suite, and Langevin diagnostics.";
  m.attr("__version__") = "0.1.0";

  m.def(
      "md_update",
      [](const Vec& z, const Vec& b, double eta) {
        return md_update(SimplexVector(z), b, eta).vec();
      },
      py::arg("z"), py::arg("b"), py::arg("eta"),
      "One entropic mirror step: returns the simplex vector proportional to "
      "z * exp(-eta * b).");

  m.def(
      "duality_gap",
      [](const Eigen::MatrixXd& A, const Vec& a, const Vec& p, const Vec& q) {
        return duality_gap(MatrixGame(A, a), SimplexVector(p),
                           SimplexVector(q));
      },
      py::arg("A"), py::arg("a"), py::arg("p"), py::arg("q"),
      "Duality gap of the pair (p, q) in the game with payoff "
      "F(p, q) = <q, a> - <q, A p> (p minimizes, q maximizes).");

  m.def("solve_matrix_game", &solve_matrix_game, py::arg("A"), py::arg("a"),
        py::arg("T"), py::arg("method") = "md", py::arg("step_rule") = "",
        py::arg("eta") = 0.0, py::arg("noise_bound") = 0.0, py::arg("seed") = 1,
        py::arg("p0") = std::nullopt, py::arg("q0") = std::nullopt,
        py::arg("trace_stride") = 0,
        "Run mirror descent ('md') or mirror-prox ('mp') on the matrix game "
        "(A, a) for T steps and return the gap trace, final iterates, and "
        "recorded constants. An empty step_rule picks the deterministic or "
        "stochastic default for the method; noise_bound > 0 switches on the "
        "bounded-noise oracle with the given seed.");

  m.def("fit_rate", &fit_rate_py, py::arg("t"), py::arg("gap"),
        py::arg("t_min") = 1,
        py::arg("t_max") = std::numeric_limits<std::int64_t>::max(),
        "Least-squares slope of log gap vs log t over the window.");

  m.def("run_config", &run_config, py::arg("text"),
        py::arg("out") = std::nullopt, py::arg("seed") = std::nullopt,
        py::arg("trace_stride") = std::nullopt,
        py::arg("assert_bounds") = std::nullopt,
        "Parse an experiment config (INI text, same format as the CLI) and "
        "run it; returns exit_code, bound-check flags, the JSON summary, and "
        "output paths. Pass out='' to skip writing files.");

  m.def("foundations_report", &foundations_report, py::arg("points") = 64,
        py::arg("extent") = 1.0, py::arg("trials") = 500, py::arg("seed") = 1,
        "Run the mirror-map calculus property suite on a periodic grid and "
        "return the per-item results.");

  m.def("gaussian_chain_check", &gaussian_chain_check,
        py::arg("total_steps") = 1000000, py::arg("burn_in") = 10000,
        py::arg("n_samples") = 10000, py::arg("gamma") = 1e-3,
        py::arg("eps") = 1.0, py::arg("seed") = 1,
        "Run the constant-step Langevin chain on the unit Gaussian and "
        "return thinned-sample statistics and the KS distance.");
}
