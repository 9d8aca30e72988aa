#include "entroprox/foundations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace entroprox {

namespace {

// ⟨μ, f⟩ = ∫ f dμ by midpoint quadrature.
double inner(const GridDensity& mu, const Vec& f) {
  return (mu.density().array() * f.array()).sum() * mu.domain().cell_volume();
}

// Log-partition functional Φ*(h) = log ∫ e^h dLeb (the convex conjugate of
// Φ restricted to probability densities).
double log_partition(const GridDomain& dom, const Vec& h) {
  return log_sum_exp(h) + std::log(dom.cell_volume());
}

// dΦ*(h): the Gibbs density e^{h}/∫e^h.
GridDensity gibbs(const GridDomain& dom, const Vec& h) {
  return GridDensity::from_unnormalized_log(dom, h);
}

// dΦ(μ) = 1 + log ρ as a grid function.
Vec entropy_grad(const GridDensity& mu) {
  return (mu.log_density().array() + 1.0).matrix();
}

// D_{Φ*}(h, h') = Φ*(h) − Φ*(h') − ⟨dΦ*(h'), h − h'⟩.
double dual_bregman(const GridDomain& dom, const Vec& h, const Vec& h_prime) {
  return log_partition(dom, h) - log_partition(dom, h_prime) -
         inner(gibbs(dom, h_prime), h - h_prime);
}

// Σ ρ log ρ · vol for a raw density vector (mixtures of valid densities).
double entropy_of(const GridDomain& dom, const Vec& density) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < density.size(); ++k) {
    if (density(k) > 0.0) s += density(k) * std::log(density(k));
  }
  return s * dom.cell_volume();
}

struct ItemAccum {
  ItemResult r;
  explicit ItemAccum(std::string key, std::string description,
                     bool has_inequality) {
    r.key = std::move(key);
    r.description = std::move(description);
    r.has_inequality = has_inequality;
    r.worst_margin = -std::numeric_limits<double>::infinity();
  }
  void identity(double lhs, double rhs) {
    r.worst_residual = std::max(r.worst_residual, std::abs(lhs - rhs));
  }
  // Checks lhs ≤ rhs; the margin lhs − rhs must stay ≤ slack.
  void ineq(double lhs, double rhs, double slack) {
    const double margin = lhs - rhs;
    r.worst_margin = std::max(r.worst_margin, margin);
    if (margin > slack) ++r.violations;
  }
  void finalize(double identity_tol) {
    r.pass = r.worst_residual <= identity_tol && r.violations == 0;
    if (!r.has_inequality) {
      r.worst_margin = 0.0;
    }
  }
};

}  // namespace

bool FoundationsReport::all_pass() const {
  return std::all_of(items.begin(), items.end(),
                     [](const ItemResult& i) { return i.pass; });
}

const ItemResult& FoundationsReport::item(const std::string& key) const {
  for (const ItemResult& i : items) {
    if (i.key == key) return i;
  }
  throw std::out_of_range("FoundationsReport: no item " + key);
}

GridDensity random_density(const GridDomain& dom, rng::Stream& stream) {
  Vec x(dom.cells());
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = stream.normal();
  const double tau =
      std::exp(stream.uniform(std::log(0.1), std::log(10.0)));
  return GridDensity::from_unnormalized_log(dom, x / tau);
}

Vec random_test_function(Eigen::Index d, rng::Stream& stream) {
  const double scale =
      std::exp(stream.uniform(std::log(0.1), std::log(10.0)));
  Vec h(d);
  for (Eigen::Index k = 0; k < d; ++k) h(k) = scale * stream.normal();
  return h;
}

FoundationsReport foundations_suite(const GridDomain& dom, int trials,
                                    std::uint64_t seed) {
  if (trials < 1) {
    throw std::invalid_argument("foundations_suite: trials must be >= 1");
  }
  FoundationsReport rep;
  rep.trials = trials;
  rep.seed = seed;
  const double slack = rep.slack;
  const Eigen::Index d = dom.cells();

  ItemAccum a("a", "gibbs_variational", false);
  ItemAccum b("b", "fenchel_young", true);
  ItemAccum c("c", "bregman_of_entropy_is_kl", false);
  ItemAccum dd("d", "strong_convexity_tv", true);
  ItemAccum e("e", "bregman_duality_shift", false);
  ItemAccum f("f", "quarter_smoothness_supnorm", true);
  ItemAccum g("g", "dual_bregman_swap", false);
  ItemAccum h_item("h", "three_point_identity", false);
  ItemAccum i_item("i", "md_optimality_constant", false);
  ItemAccum j("j", "md_one_step_regret", true);

  for (int trial = 0; trial < trials; ++trial) {
    rng::Stream stream(rng::mix(seed, static_cast<std::uint64_t>(trial)));

    {  // (a) change-of-measure variational identity.
      const GridDensity mu_prime = random_density(dom, stream);
      const Vec h = random_test_function(d, stream);
      const Vec tilted = h + mu_prime.log_density();
      const double lhs = log_sum_exp(tilted) + std::log(dom.cell_volume());
      const GridDensity mu_star = GridDensity::from_unnormalized_log(dom, tilted);
      const double rhs = inner(mu_star, h) - grid_kl(mu_star, mu_prime);
      a.identity(lhs, rhs);
    }

    {  // (b) conjugate inequality plus both equality cases.
      const GridDensity mu = random_density(dom, stream);
      const Vec h = random_test_function(d, stream);
      b.ineq(inner(mu, h) - grid_entropy(mu), log_partition(dom, h), slack);
      const GridDensity mu_h = gibbs(dom, h);
      b.identity(log_partition(dom, h), inner(mu_h, h) - grid_entropy(mu_h));
      const Vec h_mu = entropy_grad(mu);
      b.identity(grid_entropy(mu), inner(mu, h_mu) - log_partition(dom, h_mu));
    }

    {  // (c) Bregman divergence of Φ equals KL.
      const GridDensity mu = random_density(dom, stream);
      const GridDensity mu_prime = random_density(dom, stream);
      const double lhs =
          grid_entropy(mu) - grid_entropy(mu_prime) -
          (entropy_grad(mu_prime).array() *
           (mu.density() - mu_prime.density()).array())
                  .sum() *
              dom.cell_volume();
      c.identity(lhs, grid_kl(mu, mu_prime));
    }

    {  // (d) strong convexity of Φ in total variation.
      const GridDensity mu = random_density(dom, stream);
      const GridDensity mu_prime = random_density(dom, stream);
      const double lambda = stream.uniform01();
      const Vec mix =
          lambda * mu.density() + (1.0 - lambda) * mu_prime.density();
      const double lhs = lambda * grid_entropy(mu) +
                         (1.0 - lambda) * grid_entropy(mu_prime) -
                         entropy_of(dom, mix);
      const double tv = grid_tv(mu, mu_prime);
      dd.ineq(2.0 * lambda * (1.0 - lambda) * tv * tv, lhs, slack);
    }

    {  // (e) primal/dual Bregman duality, insensitive to constant shifts.
      const GridDensity mu = random_density(dom, stream);
      const GridDensity mu_prime = random_density(dom, stream);
      const double C = stream.uniform(-10.0, 10.0);
      const Vec h1 = (entropy_grad(mu_prime).array() + C).matrix();
      const Vec h2 = entropy_grad(mu);
      e.identity(grid_kl(mu, mu_prime), dual_bregman(dom, h1, h2));
    }

    {  // (f) smoothness of the log-partition map, sup-norm form as stated.
      const Vec h = random_test_function(d, stream);
      const Vec h_prime = random_test_function(d, stream);
      const double dh = (h - h_prime).lpNorm<Eigen::Infinity>();
      f.ineq(grid_tv(gibbs(dom, h), gibbs(dom, h_prime)), 0.25 * dh, slack);
      f.ineq(dual_bregman(dom, h, h_prime), dh * dh / 8.0, slack);
    }

    {  // (g) dual Bregman equals primal Bregman with swapped Gibbs points.
      const Vec h = random_test_function(d, stream);
      const Vec h_prime = random_test_function(d, stream);
      g.identity(dual_bregman(dom, h, h_prime),
                 grid_kl(gibbs(dom, h_prime), gibbs(dom, h)));
    }

    {  // (h) three-point identity of the Bregman divergence.
      const GridDensity za = random_density(dom, stream);
      const GridDensity zb = random_density(dom, stream);
      const GridDensity zc = random_density(dom, stream);
      const double lhs =
          grid_kl(za, zb) + grid_kl(zb, zc) - grid_kl(za, zc);
      const double rhs = ((zc.log_density() - zb.log_density()).array() *
                          (za.density() - zb.density()).array())
                             .sum() *
                         dom.cell_volume();
      h_item.identity(lhs, rhs);
    }

    {  // (i) the mirror step's first-order optimality residual is constant.
      const GridDensity mu = random_density(dom, stream);
      const Vec h = random_test_function(d, stream);
      const double eta =
          std::exp(stream.uniform(std::log(0.01), std::log(10.0)));
      const GridDensity mu_plus = md_step_density(mu, h, eta);
      const Vec resid = mu_plus.log_density() - mu.log_density() + eta * h;
      i_item.identity(resid.maxCoeff(), resid.minCoeff());
    }

    {  // (j) one-step mirror-descent regret bound with extrapolated field.
      const GridDensity mu_star = random_density(dom, stream);
      const GridDensity mu_tilde = random_density(dom, stream);
      const Vec h = random_test_function(d, stream);
      const Vec h_prime = random_test_function(d, stream);
      const double eta =
          std::exp(stream.uniform(std::log(0.01), std::log(10.0)));
      const GridDensity mu = md_step_density(mu_tilde, h, eta);
      const GridDensity mu_tilde_plus = md_step_density(mu_tilde, h_prime, eta);
      const double lhs =
          eta * (inner(mu, h_prime) - inner(mu_star, h_prime));
      const double dh = (h - h_prime).lpNorm<Eigen::Infinity>();
      const double tv = grid_tv(mu, mu_tilde);
      const double rhs = grid_kl(mu_star, mu_tilde) -
                         grid_kl(mu_star, mu_tilde_plus) +
                         eta * eta * dh * dh / 8.0 - 2.0 * tv * tv;
      j.ineq(lhs, rhs, slack);
    }
  }

  for (ItemAccum* acc :
       {&a, &b, &c, &dd, &e, &f, &g, &h_item, &i_item, &j}) {
    acc->finalize(rep.identity_tol);
    rep.items.push_back(acc->r);
  }
  return rep;
}

}  // namespace entroprox
