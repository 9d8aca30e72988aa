#include "entroprox/prox_finite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entroprox {

namespace {

void require_pos(double x, const char* what) {
  if (!(x > 0.0)) {
    throw std::domain_error(std::string("StepSizeRule: ") + what +
                            " must be > 0 for this rule");
  }
}

}  // namespace

double StepSizeRule::resolve(std::int64_t T) const {
  if (T < 1) throw std::domain_error("StepSizeRule: T must be >= 1");
  const double Td = static_cast<double>(T);
  double eta = 0.0;
  switch (kind) {
    case StepKind::md_deterministic:
      require_pos(M, "M");
      require_pos(D0_bar, "D0_bar");
      eta = (2.0 / M) * std::sqrt(D0_bar / Td);
      break;
    case StepKind::md_stochastic:
      require_pos(M_prime, "M_prime");
      require_pos(D0_bar, "D0_bar");
      eta = (2.0 / M_prime) * std::sqrt(D0_bar / Td);
      break;
    case StepKind::mp_deterministic:
      require_pos(L, "L");
      eta = 4.0 / L;
      break;
    case StepKind::mp_stochastic: {
      require_pos(L, "L");
      require_pos(D0_bar, "D0_bar");
      const double eta_smooth = 4.0 / (std::sqrt(3.0) * L);
      if (sigma2 > 0.0) {
        eta = std::min(eta_smooth, std::sqrt(2.0 * D0_bar / (3.0 * Td * sigma2)));
      } else {
        eta = eta_smooth;
      }
      break;
    }
    case StepKind::fixed:
      eta = fixed_eta;
      break;
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::domain_error("StepSizeRule: resolved eta must be positive");
  }
  return eta;
}

StepSizeRule StepSizeRule::fixed_step(double eta) {
  StepSizeRule r;
  r.kind = StepKind::fixed;
  r.fixed_eta = eta;
  return r;
}

StepSizeRule StepSizeRule::md_deterministic(double M, double D0_bar) {
  StepSizeRule r;
  r.kind = StepKind::md_deterministic;
  r.M = M;
  r.D0_bar = D0_bar;
  return r;
}

StepSizeRule StepSizeRule::md_stochastic(double M_prime, double D0_bar) {
  StepSizeRule r;
  r.kind = StepKind::md_stochastic;
  r.M_prime = M_prime;
  r.D0_bar = D0_bar;
  return r;
}

StepSizeRule StepSizeRule::mp_deterministic(double L) {
  StepSizeRule r;
  r.kind = StepKind::mp_deterministic;
  r.L = L;
  return r;
}

StepSizeRule StepSizeRule::mp_stochastic(double L, double sigma2,
                                         double D0_bar) {
  StepSizeRule r;
  r.kind = StepKind::mp_stochastic;
  r.L = L;
  r.sigma2 = sigma2;
  r.D0_bar = D0_bar;
  return r;
}

bool is_power_of_ten(std::int64_t t) {
  if (t < 1) return false;
  while (t % 10 == 0) t /= 10;
  return t == 1;
}

namespace {

struct RecordPlan {
  std::int64_t stride;
  std::int64_t T;
  bool take(std::int64_t t) const {
    return t == 1 || t == T || t % stride == 0 || is_power_of_ten(t);
  }
};

RecordPlan make_plan(std::int64_t T, std::int64_t requested_stride) {
  std::int64_t stride = requested_stride;
  if (stride < 0) throw std::domain_error("solve: trace_stride must be >= 0");
  if (stride == 0) stride = (T + 199) / 200;  // default ⌈T/200⌉
  if (stride == 0) stride = 1;
  return RecordPlan{stride, T};
}

void check_init(const MatrixGame& game, const SimplexVector& p0,
                const SimplexVector& q0) {
  if (p0.size() != game.n() || q0.size() != game.m()) {
    throw std::invalid_argument("solve: init dimensions do not match game");
  }
  if (!p0.interior() || !q0.interior()) {
    throw std::domain_error("solve: init must be strictly interior");
  }
}

struct TraceConstants {
  double M, L, D0_bar, sigma2;
};

TraceConstants constants_for(const MatrixGame& game, const StepSizeRule& rule,
                             const SolveOptions& opts) {
  TraceConstants c{};
  const double noise = opts.oracle ? opts.oracle->noise_bound : 0.0;
  c.M = game.grad_bound() + noise;
  c.L = game.smoothness_bound();
  c.D0_bar = rule.D0_bar > 0.0
                 ? rule.D0_bar
                 : std::log(static_cast<double>(game.m())) +
                       std::log(static_cast<double>(game.n()));
  c.sigma2 = noise * noise / 3.0;
  return c;
}

std::pair<Vec, Vec> fields_at(const MatrixGame& game, const SimplexVector& p,
                              const SimplexVector& q, const SolveOptions& opts,
                              std::int64_t t, std::int64_t phase) {
  if (opts.oracle) {
    return stochastic_grads(game, p, q, *opts.oracle, t, phase);
  }
  return {grad_p(game, q), grad_q(game, p)};
}

}  // namespace

ProxTrace solve_md(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts,
                   const SimplexVector& p0, const SimplexVector& q0) {
  if (T < 1) throw std::domain_error("solve_md: T must be >= 1");
  check_init(game, p0, q0);
  const double eta = rule.resolve(T);
  const RecordPlan plan = make_plan(T, opts.trace_stride);
  const TraceConstants cs = constants_for(game, rule, opts);

  LogWeights wp = LogWeights::from_simplex(p0);
  LogWeights wq = LogWeights::from_simplex(q0);
  Vec p_bar = Vec::Zero(game.n());
  Vec q_bar = Vec::Zero(game.m());

  ProxTrace trace;
  trace.eta = eta;
  trace.T = T;
  trace.M = cs.M;
  trace.L = cs.L;
  trace.D0_bar = cs.D0_bar;
  trace.sigma2 = cs.sigma2;

  for (std::int64_t t = 1; t <= T; ++t) {
    const SimplexVector p = wp.to_simplex();
    const SimplexVector q = wq.to_simplex();
    const double td = static_cast<double>(t);
    p_bar += (p.vec() - p_bar) / td;
    q_bar += (q.vec() - q_bar) / td;
    if (plan.take(t)) {
      const double ge = duality_gap(game, SimplexVector::unchecked(p_bar),
                                    SimplexVector::unchecked(q_bar));
      const double gl = duality_gap(game, p, q);
      trace.records.push_back({t, ge, gl, eta});
    }
    auto [bp, bq] = fields_at(game, p, q, opts, t, 0);
    wp = md_update(wp, bp, eta);
    wq = md_update(wq, bq, eta);
  }

  trace.p_bar = p_bar;
  trace.q_bar = q_bar;
  trace.p_last = wp.to_simplex().vec();
  trace.q_last = wq.to_simplex().vec();
  return trace;
}

ProxTrace solve_md(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts) {
  return solve_md(game, T, rule, opts, SimplexVector::uniform(game.n()),
                  SimplexVector::uniform(game.m()));
}

ProxTrace solve_mp(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts,
                   const SimplexVector& p0, const SimplexVector& q0) {
  if (T < 1) throw std::domain_error("solve_mp: T must be >= 1");
  check_init(game, p0, q0);
  const double eta = rule.resolve(T);
  const RecordPlan plan = make_plan(T, opts.trace_stride);
  const TraceConstants cs = constants_for(game, rule, opts);

  LogWeights wp_base = LogWeights::from_simplex(p0);  // p̃
  LogWeights wq_base = LogWeights::from_simplex(q0);  // q̃
  Vec p_bar = Vec::Zero(game.n());
  Vec q_bar = Vec::Zero(game.m());
  Vec p_leader_last, q_leader_last;

  ProxTrace trace;
  trace.eta = eta;
  trace.T = T;
  trace.M = cs.M;
  trace.L = cs.L;
  trace.D0_bar = cs.D0_bar;
  trace.sigma2 = cs.sigma2;

  for (std::int64_t t = 1; t <= T; ++t) {
    const SimplexVector pt_base = wp_base.to_simplex();
    const SimplexVector qt_base = wq_base.to_simplex();

    // Leader step from the base point, gradients at the base point.
    auto [bp0, bq0] = fields_at(game, pt_base, qt_base, opts, t, 0);
    const LogWeights wp_lead = md_update(wp_base, bp0, eta);
    const LogWeights wq_lead = md_update(wq_base, bq0, eta);
    const SimplexVector p_lead = wp_lead.to_simplex();
    const SimplexVector q_lead = wq_lead.to_simplex();

    const double td = static_cast<double>(t);
    p_bar += (p_lead.vec() - p_bar) / td;
    q_bar += (q_lead.vec() - q_bar) / td;
    if (plan.take(t)) {
      const double ge = duality_gap(game, SimplexVector::unchecked(p_bar),
                                    SimplexVector::unchecked(q_bar));
      const double gl = duality_gap(game, p_lead, q_lead);
      trace.records.push_back({t, ge, gl, eta});
    }

    // Extrapolated update of the base point, gradients at the leader point.
    auto [bp1, bq1] = fields_at(game, p_lead, q_lead, opts, t, 1);
    wp_base = md_update(wp_base, bp1, eta);
    wq_base = md_update(wq_base, bq1, eta);

    if (t == T) {
      p_leader_last = p_lead.vec();
      q_leader_last = q_lead.vec();
    }
  }

  trace.p_bar = p_bar;
  trace.q_bar = q_bar;
  trace.p_last = p_leader_last;
  trace.q_last = q_leader_last;
  return trace;
}

ProxTrace solve_mp(const MatrixGame& game, std::int64_t T,
                   const StepSizeRule& rule, const SolveOptions& opts) {
  return solve_mp(game, T, rule, opts, SimplexVector::uniform(game.n()),
                  SimplexVector::uniform(game.m()));
}

double md_bound_worst_ratio(const ProxTrace& trace) {
  double worst = 0.0;
  for (const TraceRecord& r : trace.records) {
    const double bound = trace.D0_bar / (trace.eta * static_cast<double>(r.t)) +
                         trace.eta * trace.M * trace.M / 4.0;
    worst = std::max(worst, r.gap_ergodic / bound);
  }
  return worst;
}

double mp_bound_worst_ratio(const ProxTrace& trace) {
  double worst = 0.0;
  for (const TraceRecord& r : trace.records) {
    const double bound = trace.D0_bar / (trace.eta * static_cast<double>(r.t));
    worst = std::max(worst, r.gap_ergodic / bound);
  }
  return worst;
}

double md_stochastic_gap_bound(double M_prime, double D0_bar, std::int64_t T) {
  return M_prime * std::sqrt(D0_bar / static_cast<double>(T));
}

double mp_stochastic_gap_bound(double L, double sigma2, double D0_bar,
                               std::int64_t T) {
  const double Td = static_cast<double>(T);
  return std::max(std::sqrt(6.0 * sigma2 * D0_bar / Td),
                  (std::sqrt(3.0) / 2.0) * L * D0_bar / Td);
}

}  // namespace entroprox
