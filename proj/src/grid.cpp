#include "entroprox/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace entroprox {

GridDomain::GridDomain(int dims_in, Eigen::Index points_in, double extent_in)
    : dims(dims_in), points(points_in), extent(extent_in) {
  if (dims != 1 && dims != 2) {
    throw std::invalid_argument("GridDomain: dims must be 1 or 2");
  }
  if (points < 1) {
    throw std::invalid_argument("GridDomain: points must be >= 1");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw std::invalid_argument("GridDomain: extent must be positive");
  }
}

Eigen::Index GridDomain::cells() const {
  return dims == 1 ? points : points * points;
}

double GridDomain::cell_volume() const {
  const double h = spacing();
  return dims == 1 ? h : h * h;
}

Vec GridDomain::coordinate(Eigen::Index flat) const {
  if (flat < 0 || flat >= cells()) {
    throw std::out_of_range("GridDomain: cell index out of range");
  }
  const double h = spacing();
  Vec x(dims);
  if (dims == 1) {
    x(0) = (static_cast<double>(flat) + 0.5) * h;
  } else {
    x(0) = (static_cast<double>(flat / points) + 0.5) * h;
    x(1) = (static_cast<double>(flat % points) + 0.5) * h;
  }
  return x;
}

GridDensity::GridDensity(const GridDomain& dom, const Vec& log_density)
    : dom_(dom), log_density_(log_density) {
  if (log_density_.size() != dom_.cells()) {
    throw std::invalid_argument("GridDensity: size does not match domain");
  }
  if (!log_density_.allFinite()) {
    throw std::domain_error("GridDensity: log-density must be finite");
  }
  const double mass = log_density_.array().exp().sum() * dom_.cell_volume();
  if (std::abs(mass - 1.0) > 1e-10) {
    throw std::domain_error("GridDensity: quadrature mass deviates from 1");
  }
}

GridDensity GridDensity::uniform(const GridDomain& dom) {
  return GridDensity(
      dom, Vec::Constant(dom.cells(), -std::log(dom.extent) * dom.dims),
      unchecked_t{});
}

GridDensity GridDensity::from_unnormalized_log(const GridDomain& dom,
                                               const Vec& logw) {
  if (logw.size() != dom.cells()) {
    throw std::invalid_argument(
        "GridDensity: log-weight size does not match domain");
  }
  if (!logw.allFinite()) {
    throw std::domain_error("GridDensity: log-weights must be finite");
  }
  const double log_mass = log_sum_exp(logw) + std::log(dom.cell_volume());
  return GridDensity(dom, (logw.array() - log_mass).matrix(), unchecked_t{});
}

GridDensity GridDensity::from_masses(const GridDomain& dom,
                                     const Vec& masses) {
  if (masses.size() != dom.cells()) {
    throw std::invalid_argument("GridDensity: mass size does not match domain");
  }
  if (!(masses.minCoeff() > 0.0) || !masses.allFinite()) {
    throw std::domain_error("GridDensity: masses must be strictly positive");
  }
  if (std::abs(masses.sum() - 1.0) > 1e-10) {
    throw std::domain_error("GridDensity: masses must sum to 1");
  }
  return GridDensity(
      dom, (masses.array().log() - std::log(dom.cell_volume())).matrix(),
      unchecked_t{});
}

GridDensity GridDensity::von_mises(const GridDomain& dom, double center,
                                   double kappa) {
  if (dom.dims != 1) {
    throw std::invalid_argument("GridDensity::von_mises: domain must be 1-D");
  }
  Vec logw(dom.cells());
  const double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index k = 0; k < dom.cells(); ++k) {
    const double x = dom.coordinate(k)(0);
    logw(k) = kappa * std::cos(two_pi * (x - center) / dom.extent);
  }
  return from_unnormalized_log(dom, logw);
}

double grid_entropy(const GridDensity& mu) {
  // ∫ ρ log ρ ≈ Σ ρ_k log ρ_k · vol.
  return (mu.density().array() * mu.log_density().array()).sum() *
         mu.domain().cell_volume();
}

double grid_kl(const GridDensity& mu, const GridDensity& mu_prime) {
  if (!mu.domain().same_shape(mu_prime.domain())) {
    throw std::invalid_argument("grid_kl: domains differ");
  }
  return (mu.density().array() *
          (mu.log_density() - mu_prime.log_density()).array())
             .sum() *
         mu.domain().cell_volume();
}

double grid_tv(const GridDensity& mu, const GridDensity& mu_prime) {
  if (!mu.domain().same_shape(mu_prime.domain())) {
    throw std::invalid_argument("grid_tv: domains differ");
  }
  return 0.5 * (mu.density() - mu_prime.density()).cwiseAbs().sum() *
         mu.domain().cell_volume();
}

Kernel Kernel::cosine(double amplitude, double frequency) {
  Kernel k;
  k.kind = Kind::cosine;
  k.amplitude = amplitude;
  k.frequency = frequency;
  return k;
}

Kernel Kernel::constant(double value) {
  Kernel k;
  k.kind = Kind::constant;
  k.amplitude = value;
  return k;
}

Kernel Kernel::gaussian_bump(double amplitude, double width) {
  if (!(width > 0.0)) {
    throw std::invalid_argument("Kernel::gaussian_bump: width must be > 0");
  }
  Kernel k;
  k.kind = Kind::gaussian_bump;
  k.amplitude = amplitude;
  k.width = width;
  return k;
}

Kernel Kernel::matrix_lookup(Eigen::MatrixXd table) {
  if (table.rows() < 1 || table.cols() < 1 || !table.allFinite()) {
    throw std::invalid_argument("Kernel::matrix_lookup: invalid table");
  }
  Kernel k;
  k.kind = Kind::matrix_lookup;
  k.table = std::move(table);
  return k;
}

double Kernel::sup_abs() const {
  switch (kind) {
    case Kind::cosine:
    case Kind::constant:
    case Kind::gaussian_bump:
      return std::abs(amplitude);
    case Kind::matrix_lookup:
      return table.cwiseAbs().maxCoeff();
  }
  throw std::logic_error("Kernel: unknown kind");
}

namespace {
// Signed displacement w−θ wrapped to [−extent/2, extent/2).
double periodic_delta(double w, double theta, double extent) {
  double d = w - theta;
  d -= extent * std::floor(d / extent + 0.5);
  return d;
}
}  // namespace

double Kernel::eval(double w, double theta, double extent) const {
  switch (kind) {
    case Kind::cosine:
      return amplitude * std::cos(frequency * (w - theta));
    case Kind::constant:
      return amplitude;
    case Kind::gaussian_bump: {
      const double d = periodic_delta(w, theta, extent);
      return amplitude * std::exp(-d * d / (2.0 * width * width));
    }
    case Kind::matrix_lookup:
      throw std::logic_error("Kernel: matrix_lookup has no pointwise form");
  }
  throw std::logic_error("Kernel: unknown kind");
}

double Kernel::d_dw(double w, double theta, double extent) const {
  switch (kind) {
    case Kind::cosine:
      return -amplitude * frequency * std::sin(frequency * (w - theta));
    case Kind::constant:
      return 0.0;
    case Kind::gaussian_bump: {
      const double d = periodic_delta(w, theta, extent);
      return eval(w, theta, extent) * (-d / (width * width));
    }
    case Kind::matrix_lookup:
      throw std::logic_error("Kernel: matrix_lookup has no pointwise form");
  }
  throw std::logic_error("Kernel: unknown kind");
}

double Kernel::d_dtheta(double w, double theta, double extent) const {
  return -d_dw(w, theta, extent);
}

GFunc GFunc::zero() { return GFunc{}; }

GFunc GFunc::cosine(double amplitude, double frequency, double phase) {
  GFunc g;
  g.kind = Kind::cosine;
  g.amplitude = amplitude;
  g.frequency = frequency;
  g.phase = phase;
  return g;
}

double GFunc::eval(double w) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::cosine:
      return amplitude * std::cos(frequency * w + phase);
  }
  throw std::logic_error("GFunc: unknown kind");
}

double GFunc::d_dw(double w) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::cosine:
      return -amplitude * frequency * std::sin(frequency * w + phase);
  }
  throw std::logic_error("GFunc: unknown kind");
}

double GFunc::sup_abs() const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::cosine:
      return std::abs(amplitude);
  }
  throw std::logic_error("GFunc: unknown kind");
}

KernelGame::KernelGame(const GridDomain& dom_w, const GridDomain& dom_th,
                       Kernel kernel, GFunc g)
    : dom_w_(dom_w), dom_th_(dom_th), kernel_(std::move(kernel)),
      g_(std::move(g)) {
  if (dom_w_.dims != 1 || dom_th_.dims != 1) {
    throw std::invalid_argument("KernelGame: domains must be 1-D");
  }
  const Eigen::Index nw = dom_w_.cells();
  const Eigen::Index nth = dom_th_.cells();
  if (kernel_.kind == Kernel::Kind::matrix_lookup) {
    if (kernel_.table.rows() != nw || kernel_.table.cols() != nth) {
      throw std::invalid_argument(
          "KernelGame: lookup table shape does not match grids");
    }
    K_ = kernel_.table;
  } else {
    K_.resize(nw, nth);
    for (Eigen::Index i = 0; i < nw; ++i) {
      const double w = dom_w_.coordinate(i)(0);
      for (Eigen::Index j = 0; j < nth; ++j) {
        K_(i, j) = kernel_.eval(w, dom_th_.coordinate(j)(0), dom_w_.extent);
      }
    }
  }
  g_values_.resize(nw);
  for (Eigen::Index i = 0; i < nw; ++i) {
    g_values_(i) = g_.eval(dom_w_.coordinate(i)(0));
  }
}

KernelGame cosine_game(Eigen::Index points) {
  const GridDomain dom(1, points, 1.0);
  return KernelGame(dom, dom, Kernel::cosine(1.0, 2.0 * std::numbers::pi),
                    GFunc::zero());
}

Vec apply_G(const KernelGame& game, const GridDensity& nu) {
  if (!nu.domain().same_shape(game.dom_th())) {
    throw std::invalid_argument("apply_G: density domain mismatch");
  }
  return game.K_matrix() * nu.masses();
}

Vec apply_Gdag(const KernelGame& game, const GridDensity& mu) {
  if (!mu.domain().same_shape(game.dom_w())) {
    throw std::invalid_argument("apply_Gdag: density domain mismatch");
  }
  return game.K_matrix().transpose() * mu.masses();
}

namespace {

// Duality gap evaluated on cell-mass vectors. Expressions deliberately
// mirror the finite-game implementation term for term so that a lookup
// kernel reproduces the matrix solver exactly.
double mass_gap(const KernelGame& game, const Vec& z_nu, const Vec& z_mu) {
  const Vec payoff_mu = game.g_vector() - game.K_matrix() * z_nu;
  const Vec payoff_nu = game.K_matrix().transpose() * z_mu;
  const double gap =
      payoff_mu.maxCoeff() + payoff_nu.maxCoeff() - z_mu.dot(game.g_vector());
  if (gap < -1e-12) {
    throw std::runtime_error("grid_duality_gap: negative value beyond roundoff");
  }
  return std::max(0.0, gap);
}

struct GridRecordPlan {
  std::int64_t stride;
  std::int64_t T;
  bool take(std::int64_t t) const {
    return t == 1 || t == T || t % stride == 0 || is_power_of_ten(t);
  }
};

GridRecordPlan make_grid_plan(std::int64_t T, std::int64_t requested_stride) {
  std::int64_t stride = requested_stride;
  if (stride < 0) throw std::domain_error("solve: trace_stride must be >= 0");
  if (stride == 0) stride = (T + 199) / 200;
  if (stride == 0) stride = 1;
  return GridRecordPlan{stride, T};
}

struct GridSetup {
  double eta;
  GridRecordPlan plan;
  LogWeights w_mu, w_nu;
  Vec mu_bar, nu_bar;  // running mean of cell masses
};

GridSetup setup_solve(const KernelGame& game, std::int64_t T,
                      const StepSizeRule& rule, const GridDensity& mu0,
                      const GridDensity& nu0, std::int64_t trace_stride,
                      GridTrace& trace) {
  if (T < 1) throw std::domain_error("solve: T must be >= 1");
  if (!mu0.domain().same_shape(game.dom_w()) ||
      !nu0.domain().same_shape(game.dom_th())) {
    throw std::invalid_argument("solve: init domains do not match game");
  }
  const double eta = rule.resolve(T);
  trace.eta = eta;
  trace.T = T;
  trace.M = game.grad_bound();
  trace.L = game.smoothness_bound();
  trace.D0_bar = rule.D0_bar > 0.0
                     ? rule.D0_bar
                     : std::log(static_cast<double>(game.dom_w().cells())) +
                           std::log(static_cast<double>(game.dom_th().cells()));
  trace.sigma2 = rule.sigma2;
  // Initializing from the cell-mass simplex keeps the state construction on
  // the same code path as the finite solver.
  return GridSetup{
      eta, make_grid_plan(T, trace_stride),
      LogWeights::from_simplex(SimplexVector::unchecked(mu0.masses())),
      LogWeights::from_simplex(SimplexVector::unchecked(nu0.masses())),
      Vec::Zero(game.dom_w().cells()), Vec::Zero(game.dom_th().cells())};
}

}  // namespace

double grid_duality_gap(const KernelGame& game, const GridDensity& mu,
                        const GridDensity& nu) {
  if (!mu.domain().same_shape(game.dom_w()) ||
      !nu.domain().same_shape(game.dom_th())) {
    throw std::invalid_argument("grid_duality_gap: density domain mismatch");
  }
  return mass_gap(game, nu.masses(), mu.masses());
}

GridDensity md_step_density(const GridDensity& mu, const Vec& h, double eta) {
  if (h.size() != mu.log_density().size()) {
    throw std::invalid_argument("md_step_density: field dimension mismatch");
  }
  if (!h.allFinite()) {
    throw std::domain_error("md_step_density: field must be finite");
  }
  if (!(eta >= 0.0)) {
    throw std::domain_error("md_step_density: eta must be >= 0");
  }
  return GridDensity::from_unnormalized_log(mu.domain(),
                                            mu.log_density() - eta * h);
}

GridDensity GridTrace::mu_bar_density() const {
  return GridDensity::from_unnormalized_log(dom_w,
                                            mu_bar.array().log().matrix());
}

GridDensity GridTrace::nu_bar_density() const {
  return GridDensity::from_unnormalized_log(dom_th,
                                            nu_bar.array().log().matrix());
}

GridTrace solve_inf_md(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, const GridDensity& mu0,
                       const GridDensity& nu0, std::int64_t trace_stride) {
  GridTrace trace{{}, game.dom_w(), game.dom_th(), {}, {}, {}, {}, 0.0, 0,
                  0.0, 0.0, 0.0, 0.0};
  GridSetup s = setup_solve(game, T, rule, mu0, nu0, trace_stride, trace);

  for (std::int64_t t = 1; t <= T; ++t) {
    const SimplexVector z_nu = s.w_nu.to_simplex();
    const SimplexVector z_mu = s.w_mu.to_simplex();
    const double td = static_cast<double>(t);
    s.nu_bar += (z_nu.vec() - s.nu_bar) / td;
    s.mu_bar += (z_mu.vec() - s.mu_bar) / td;
    if (s.plan.take(t)) {
      const double ge = mass_gap(game, s.nu_bar, s.mu_bar);
      const double gl = mass_gap(game, z_nu.vec(), z_mu.vec());
      trace.records.push_back({t, ge, gl, s.eta});
    }
    const Vec b_nu = -(game.K_matrix().transpose() * z_mu.vec());
    const Vec b_mu = -game.g_vector() + game.K_matrix() * z_nu.vec();
    s.w_nu = md_update(s.w_nu, b_nu, s.eta);
    s.w_mu = md_update(s.w_mu, b_mu, s.eta);
  }

  const double vol_w = game.dom_w().cell_volume();
  const double vol_th = game.dom_th().cell_volume();
  trace.mu_bar = s.mu_bar / vol_w;
  trace.nu_bar = s.nu_bar / vol_th;
  trace.mu_last = s.w_mu.to_simplex().vec() / vol_w;
  trace.nu_last = s.w_nu.to_simplex().vec() / vol_th;
  return trace;
}

GridTrace solve_inf_md(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, std::int64_t trace_stride) {
  return solve_inf_md(game, T, rule, GridDensity::uniform(game.dom_w()),
                      GridDensity::uniform(game.dom_th()), trace_stride);
}

GridTrace solve_inf_mp(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, const GridDensity& mu0,
                       const GridDensity& nu0, std::int64_t trace_stride) {
  GridTrace trace{{}, game.dom_w(), game.dom_th(), {}, {}, {}, {}, 0.0, 0,
                  0.0, 0.0, 0.0, 0.0};
  GridSetup s = setup_solve(game, T, rule, mu0, nu0, trace_stride, trace);
  Vec mu_leader_last, nu_leader_last;

  for (std::int64_t t = 1; t <= T; ++t) {
    const SimplexVector znu_base = s.w_nu.to_simplex();
    const SimplexVector zmu_base = s.w_mu.to_simplex();

    // Leader step from the base point, fields at the base point.
    const Vec bnu0 = -(game.K_matrix().transpose() * zmu_base.vec());
    const Vec bmu0 = -game.g_vector() + game.K_matrix() * znu_base.vec();
    const LogWeights wnu_lead = md_update(s.w_nu, bnu0, s.eta);
    const LogWeights wmu_lead = md_update(s.w_mu, bmu0, s.eta);
    const SimplexVector znu_lead = wnu_lead.to_simplex();
    const SimplexVector zmu_lead = wmu_lead.to_simplex();

    const double td = static_cast<double>(t);
    s.nu_bar += (znu_lead.vec() - s.nu_bar) / td;
    s.mu_bar += (zmu_lead.vec() - s.mu_bar) / td;
    if (s.plan.take(t)) {
      const double ge = mass_gap(game, s.nu_bar, s.mu_bar);
      const double gl = mass_gap(game, znu_lead.vec(), zmu_lead.vec());
      trace.records.push_back({t, ge, gl, s.eta});
    }

    // Extrapolated update of the base point, fields at the leader point.
    const Vec bnu1 = -(game.K_matrix().transpose() * zmu_lead.vec());
    const Vec bmu1 = -game.g_vector() + game.K_matrix() * znu_lead.vec();
    s.w_nu = md_update(s.w_nu, bnu1, s.eta);
    s.w_mu = md_update(s.w_mu, bmu1, s.eta);

    if (t == T) {
      nu_leader_last = znu_lead.vec();
      mu_leader_last = zmu_lead.vec();
    }
  }

  const double vol_w = game.dom_w().cell_volume();
  const double vol_th = game.dom_th().cell_volume();
  trace.mu_bar = s.mu_bar / vol_w;
  trace.nu_bar = s.nu_bar / vol_th;
  trace.mu_last = mu_leader_last / vol_w;
  trace.nu_last = nu_leader_last / vol_th;
  return trace;
}

GridTrace solve_inf_mp(const KernelGame& game, std::int64_t T,
                       const StepSizeRule& rule, std::int64_t trace_stride) {
  return solve_inf_mp(game, T, rule, GridDensity::uniform(game.dom_w()),
                      GridDensity::uniform(game.dom_th()), trace_stride);
}

double md_bound_worst_ratio(const GridTrace& trace) {
  double worst = 0.0;
  for (const TraceRecord& r : trace.records) {
    const double bound = trace.D0_bar / (trace.eta * static_cast<double>(r.t)) +
                         trace.eta * trace.M * trace.M / 4.0;
    worst = std::max(worst, r.gap_ergodic / bound);
  }
  return worst;
}

double mp_bound_worst_ratio(const GridTrace& trace) {
  double worst = 0.0;
  for (const TraceRecord& r : trace.records) {
    const double bound = trace.D0_bar / (trace.eta * static_cast<double>(r.t));
    worst = std::max(worst, r.gap_ergodic / bound);
  }
  return worst;
}

void save_density_csv(const GridDensity& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_density_csv: cannot open " + path);
  }
  out << std::setprecision(17);
  const int dims = d.domain().dims;
  out << (dims == 1 ? "x,density\n" : "x,y,density\n");
  for (Eigen::Index k = 0; k < d.domain().cells(); ++k) {
    const Vec x = d.domain().coordinate(k);
    for (int i = 0; i < dims; ++i) out << x(i) << ',';
    out << d.density()(k) << '\n';
  }
}

}  // namespace entroprox
