#include "entroprox/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace entroprox {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSumTol = 1e-12;
}  // namespace

double log_sum_exp(const Vec& x) {
  if (x.size() == 0) throw std::invalid_argument("log_sum_exp: empty vector");
  const double m = x.maxCoeff();
  if (m == -kInf) return -kInf;
  if (!std::isfinite(m)) {
    throw std::invalid_argument("log_sum_exp: non-finite (+inf or NaN) entry");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    if (xi == -kInf) continue;  // exp(-inf) = 0; avoid -inf - m arithmetic
    s += std::exp(xi - m);
  }
  return m + std::log(s);
}

Vec softmax(const Vec& x) {
  const double lse = log_sum_exp(x);
  if (lse == -kInf) {
    throw std::invalid_argument("softmax: all entries are -inf");
  }
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out(i) = (x(i) == -kInf) ? 0.0 : std::exp(x(i) - lse);
  }
  return out;
}

double entropy(const Vec& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p(i);
    if (pi > 0.0) s += pi * std::log(pi);
  }
  return s;
}

double kl_divergence(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p(i);
    if (pi <= 0.0) continue;
    const double qi = q(i);
    if (qi <= 0.0) return kInf;
    s += pi * std::log(pi / qi);
  }
  return s;
}

double tv_norm(const Vec& v) { return 0.5 * v.lpNorm<1>(); }

SimplexVector::SimplexVector(const Vec& v) : v_(v) {
  if (v_.size() == 0) throw std::domain_error("SimplexVector: empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    const double x = v_(i);
    if (!(x >= 0.0)) {  // catches negatives and NaN
      throw std::domain_error("SimplexVector: entries must be nonnegative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTol) {
    throw std::domain_error("SimplexVector: entries must sum to 1 within 1e-12");
  }
}

SimplexVector SimplexVector::uniform(Eigen::Index d) {
  if (d < 1) throw std::domain_error("SimplexVector::uniform: d must be >= 1");
  return SimplexVector(Vec::Constant(d, 1.0 / static_cast<double>(d)),
                       unchecked_t{});
}

SimplexVector SimplexVector::vertex(Eigen::Index d, Eigen::Index i) {
  if (d < 1 || i < 0 || i >= d) {
    throw std::domain_error("SimplexVector::vertex: index out of range");
  }
  Vec v = Vec::Zero(d);
  v(i) = 1.0;
  return SimplexVector(std::move(v), unchecked_t{});
}

SimplexVector SimplexVector::unchecked(Vec v) {
  return SimplexVector(std::move(v), unchecked_t{});
}

bool SimplexVector::interior() const {
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (!(v_(i) > 0.0)) return false;
  }
  return true;
}

LogWeights::LogWeights(const Vec& logw) : w_(logw) {
  if (w_.size() == 0) throw std::domain_error("LogWeights: empty");
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_(i))) {
      throw std::domain_error("LogWeights: entries must be finite");
    }
  }
}

LogWeights LogWeights::from_simplex(const SimplexVector& p) {
  if (!p.interior()) {
    throw std::domain_error(
        "LogWeights::from_simplex: point must be strictly interior");
  }
  return LogWeights(p.vec().array().log().matrix(), unchecked_t{});
}

SimplexVector LogWeights::to_simplex() const {
  return SimplexVector::unchecked(softmax(w_));
}

namespace {
void check_md_args(Eigen::Index dim_p, const Vec& b, double eta) {
  if (b.size() != dim_p) {
    throw std::invalid_argument("md_update: dimension mismatch");
  }
  if (!(eta >= 0.0)) {  // catches negatives and NaN
    throw std::domain_error("md_update: eta must be >= 0");
  }
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (!std::isfinite(b(i))) {
      throw std::invalid_argument("md_update: b must be finite");
    }
  }
}
}  // namespace

SimplexVector md_update(const SimplexVector& p, const Vec& b, double eta) {
  check_md_args(p.size(), b, eta);
  Vec logw(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    logw(i) = (p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity()) -
              eta * b(i);
  }
  return SimplexVector::unchecked(softmax(logw));
}

LogWeights md_update(const LogWeights& w, const Vec& b, double eta) {
  check_md_args(w.size(), b, eta);
  Vec next = w.vec() - eta * b;
  next.array() -= log_sum_exp(next);  // renormalize; softmax unchanged
  return LogWeights(next);
}

}  // namespace entroprox
