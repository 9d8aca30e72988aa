#include "entroprox/sgld.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace entroprox {

SgldSchedule::Point SgldSchedule::at(std::int64_t t) const {
  const double td = static_cast<double>(std::max<std::int64_t>(t, 1));
  Point p;
  p.K = static_cast<std::int64_t>(
      std::floor(std::pow(1.0 + inner_growth, td)));
  p.gamma = gamma0 * std::pow(1.0 - gamma_decay, td);
  p.eps = eps0 * std::pow(1.0 - eps_decay, td);
  return p;
}

namespace {

void check_step_args(const LangevinState& state, const Vec& grad, double gamma,
                     double eps) {
  if (grad.size() != state.position.size()) {
    throw std::invalid_argument("sgld_step: gradient dimension mismatch");
  }
  if (!(gamma >= 0.0) || !(eps >= 0.0)) {
    throw std::domain_error("sgld_step: gamma and eps must be >= 0");
  }
  if (!grad.allFinite()) {
    std::ostringstream msg;
    msg << "sgld_step: non-finite gradient at position [";
    for (Eigen::Index i = 0; i < state.position.size(); ++i) {
      if (i) msg << ", ";
      msg << state.position(i);
    }
    msg << "] after " << state.steps << " steps";
    throw std::runtime_error(msg.str());
  }
}

void wrap_into(Vec& z, double extent) {
  if (extent > 0.0) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) -= extent * std::floor(z(i) / extent);
    }
  }
}

}  // namespace

void sgld_step(LangevinState& state, const Vec& grad, double gamma, double eps,
               double wrap_extent) {
  check_step_args(state, grad, gamma, eps);
  const double noise_scale = std::sqrt(2.0 * gamma) * eps;
  for (Eigen::Index i = 0; i < state.position.size(); ++i) {
    state.position(i) +=
        -gamma * grad(i) + noise_scale * state.stream.normal();
  }
  wrap_into(state.position, wrap_extent);
  ++state.steps;
}

void preconditioned_sgld_step(LangevinState& state, RmspropAccumulator& acc,
                              const Vec& grad, double gamma, double eps,
                              double wrap_extent) {
  check_step_args(state, grad, gamma, eps);
  if (acc.ema.size() == 0) {
    acc.ema = Vec::Zero(grad.size());
  } else if (acc.ema.size() != grad.size()) {
    throw std::invalid_argument(
        "preconditioned_sgld_step: accumulator dimension mismatch");
  }
  acc.ema = acc.decay * acc.ema +
            (1.0 - acc.decay) * grad.cwiseProduct(grad);
  const double noise_scale = std::sqrt(2.0 * gamma) * eps;
  for (Eigen::Index i = 0; i < state.position.size(); ++i) {
    const double precond = 1.0 / (std::sqrt(acc.ema(i)) + acc.floor_value);
    state.position(i) += -gamma * precond * grad(i) +
                         noise_scale * std::sqrt(precond) *
                             state.stream.normal();
  }
  wrap_into(state.position, wrap_extent);
  ++state.steps;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("two_sample_ks: samples must be non-empty");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double stat = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    stat = std::max(stat, std::abs(static_cast<double>(i) / na -
                                   static_cast<double>(j) / nb));
  }
  return stat;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0 || m == 0) {
    throw std::invalid_argument("ks_critical: invalid arguments");
  }
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

GaussianChainResult unit_gaussian_chain_check(std::int64_t total_steps,
                                              std::int64_t burn_in,
                                              std::int64_t n_samples,
                                              double gamma, double eps,
                                              std::uint64_t seed) {
  if (total_steps <= burn_in || n_samples < 2) {
    throw std::invalid_argument(
        "unit_gaussian_chain_check: need total_steps > burn_in, n >= 2");
  }
  const std::int64_t thin = (total_steps - burn_in) / n_samples;
  if (thin < 1) {
    throw std::invalid_argument(
        "unit_gaussian_chain_check: fewer post-burn-in steps than samples");
  }

  LangevinState chain(Vec::Zero(1), rng::mix(seed, 1));
  GaussianChainResult res;
  res.samples.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t step = 1; step <= total_steps; ++step) {
    sgld_step(chain, chain.position, gamma, eps);  // ∇U(z) = z
    if (step > burn_in && (step - burn_in) % thin == 0 &&
        res.samples.size() < static_cast<std::size_t>(n_samples)) {
      res.samples.push_back(chain.position(0));
    }
  }

  double sum = 0.0;
  for (double x : res.samples) sum += x;
  res.mean = sum / static_cast<double>(res.samples.size());
  double ss = 0.0;
  for (double x : res.samples) ss += (x - res.mean) * (x - res.mean);
  res.variance = ss / static_cast<double>(res.samples.size() - 1);

  rng::Stream ref(rng::mix(seed, 2));
  std::vector<double> iid(res.samples.size());
  for (double& x : iid) x = ref.normal();
  res.ks = two_sample_ks(res.samples, iid);
  res.ks_critical_1pct = ks_critical(0.01, res.samples.size(), iid.size());
  return res;
}

}  // namespace entroprox
