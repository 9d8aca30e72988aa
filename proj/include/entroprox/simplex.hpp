#pragma once

#include <Eigen/Dense>

namespace entroprox {

using Vec = Eigen::VectorXd;

// log(Σ_i e^{x_i}), numerically stable. Entries may be -inf (treated as
// missing mass); returns -inf when every entry is -inf.
double log_sum_exp(const Vec& x);

// softmax(x)_i = e^{x_i} / Σ_j e^{x_j}, stable under constant shifts.
// Requires at least one finite entry.
Vec softmax(const Vec& x);

// Negative Shannon entropy Φ(p) = Σ_i p_i log p_i with 0·log 0 := 0.
double entropy(const Vec& p);

// KL divergence D(p‖q) = Σ_i p_i log(p_i/q_i); +inf when p puts mass where
// q has none; 0·log(0/·) := 0.
double kl_divergence(const Vec& p, const Vec& q);

// Total-variation norm of a signed vector: tv_norm(v) = ½·Σ_i |v_i|.
// This convention makes Pinsker hold as D ≥ 2·TV².
double tv_norm(const Vec& v);

// Probability vector on the simplex: entries ≥ 0, Σ = 1 within 1e-12.
class SimplexVector {
 public:
  // Validates the invariant; throws std::domain_error on violation.
  explicit SimplexVector(const Vec& v);

  static SimplexVector uniform(Eigen::Index d);
  static SimplexVector vertex(Eigen::Index d, Eigen::Index i);
  // Takes the vector as already valid (used internally after softmax).
  static SimplexVector unchecked(Vec v);

  const Vec& vec() const { return v_; }
  Eigen::Index size() const { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_(i); }

  // True iff every entry is strictly positive.
  bool interior() const;

 private:
  struct unchecked_t {};
  SimplexVector(Vec v, unchecked_t) : v_(std::move(v)) {}
  Vec v_;
};

// Unnormalized log-weights representing the strictly positive point
// softmax(w) of the simplex. All entries must be finite. Iterating mirror
// descent on this representation avoids underflow from long products.
class LogWeights {
 public:
  explicit LogWeights(const Vec& logw);  // throws std::domain_error if non-finite

  // Requires p strictly interior (log of a zero entry is not finite).
  static LogWeights from_simplex(const SimplexVector& p);

  SimplexVector to_simplex() const;
  const Vec& vec() const { return w_; }
  Eigen::Index size() const { return w_.size(); }

 private:
  struct unchecked_t {};
  LogWeights(Vec w, unchecked_t) : w_(std::move(w)) {}
  Vec w_;
};

// Entropic mirror-descent update: returns p' with p'_i ∝ p_i·e^{−η·b_i}.
// b is a descent field: a minimizing player passes its gradient, a
// maximizing player passes the negated gradient. Requires η ≥ 0 (η = 0 is
// the identity) and dim(b) = dim(p); throws std::domain_error /
// std::invalid_argument otherwise. Zero entries of p stay zero.
SimplexVector md_update(const SimplexVector& p, const Vec& b, double eta);

// Same update in log space: w' = w − η·b, renormalized so that
// log_sum_exp(w') = 0 (the normalization does not change softmax(w')).
LogWeights md_update(const LogWeights& w, const Vec& b, double eta);

}  // namespace entroprox
