#include "entroprox/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace entroprox {

namespace {
constexpr double kFeasTol = 1e-9;

void check_p(const MatrixGame& g, const SimplexVector& p) {
  if (p.size() != g.n()) {
    throw std::invalid_argument("matrix game: p has wrong dimension");
  }
}

void check_q(const MatrixGame& g, const SimplexVector& q) {
  if (q.size() != g.m()) {
    throw std::invalid_argument("matrix game: q has wrong dimension");
  }
}
}  // namespace

MatrixGame::MatrixGame(Eigen::MatrixXd A_in, Vec a_in)
    : A(std::move(A_in)), a(std::move(a_in)) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument("MatrixGame: A must be at least 1x1");
  }
  if (a.size() != A.rows()) {
    throw std::invalid_argument("MatrixGame: a must have length m = rows(A)");
  }
  if (!A.allFinite() || !a.allFinite()) {
    throw std::invalid_argument("MatrixGame: entries must be finite");
  }
}

double MatrixGame::value(const SimplexVector& p, const SimplexVector& q) const {
  check_p(*this, p);
  check_q(*this, q);
  return q.vec().dot(a) - q.vec().dot(A * p.vec());
}

double MatrixGame::grad_bound() const {
  return a.lpNorm<Eigen::Infinity>() + A.cwiseAbs().maxCoeff();
}

double MatrixGame::smoothness_bound() const {
  return 2.0 * A.cwiseAbs().maxCoeff();
}

Vec grad_p(const MatrixGame& game, const SimplexVector& q) {
  check_q(game, q);
  return -(game.A.transpose() * q.vec());
}

Vec grad_q(const MatrixGame& game, const SimplexVector& p) {
  check_p(game, p);
  return -game.a + game.A * p.vec();
}

double duality_gap(const MatrixGame& game, const SimplexVector& p,
                   const SimplexVector& q) {
  check_p(game, p);
  check_q(game, q);
  const Vec payoff_q = game.a - game.A * p.vec();      // best response of q
  const Vec payoff_p = game.A.transpose() * q.vec();   // best response of p
  const double gap =
      payoff_q.maxCoeff() + payoff_p.maxCoeff() - q.vec().dot(game.a);
  // Provably ≥ 0; a materially negative value means corrupted inputs, while
  // values within roundoff of zero are clamped.
  if (gap < -1e-12) {
    throw std::runtime_error("duality_gap: negative value beyond roundoff");
  }
  return std::max(0.0, gap);
}

std::pair<Vec, Vec> stochastic_grads(const MatrixGame& game,
                                     const SimplexVector& p,
                                     const SimplexVector& q,
                                     const StochasticOracleConfig& cfg,
                                     std::int64_t t, std::int64_t phase) {
  Vec gp = grad_p(game, q);
  Vec gq = grad_q(game, p);
  if (cfg.noise_bound < 0.0) {
    throw std::invalid_argument("stochastic_grads: noise_bound must be >= 0");
  }
  if (cfg.noise_bound > 0.0) {
    rng::Stream stream(rng::mix(cfg.seed, static_cast<std::uint64_t>(t),
                                static_cast<std::uint64_t>(phase)));
    for (Eigen::Index j = 0; j < gp.size(); ++j) {
      gp(j) += stream.uniform(-cfg.noise_bound, cfg.noise_bound);
    }
    for (Eigen::Index i = 0; i < gq.size(); ++i) {
      gq(i) += stream.uniform(-cfg.noise_bound, cfg.noise_bound);
    }
  }
  return {std::move(gp), std::move(gq)};
}

namespace {

// All size-k index subsets of {0,...,d-1} in lexicographic order.
std::vector<std::vector<Eigen::Index>> subsets_of_size(Eigen::Index d, int k) {
  std::vector<std::vector<Eigen::Index>> out;
  std::vector<Eigen::Index> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

struct CandidateNE {
  Vec p, q;
  double v = 0.0;
  bool ok = false;
};

CandidateNE try_supports(const MatrixGame& g,
                         const std::vector<Eigen::Index>& S,   // p support
                         const std::vector<Eigen::Index>& T) {  // q support
  const int kp = static_cast<int>(S.size());
  const int kq = static_cast<int>(T.size());
  const int dim = kp + kq + 2;  // unknowns: p_S, q_T, v, c
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
  Vec rhs = Vec::Zero(dim);

  // Rows i ∈ T are indifferent for q: a_i − Σ_{j∈S} A_{ij} p_j − v = 0.
  for (int r = 0; r < kq; ++r) {
    const Eigen::Index i = T[r];
    for (int cidx = 0; cidx < kp; ++cidx) B(r, cidx) = -g.A(i, S[cidx]);
    B(r, kp + kq) = -1.0;  // v
    rhs(r) = -g.a(i);
  }
  // Columns j ∈ S are indifferent for p: Σ_{i∈T} A_{ij} q_i − c = 0.
  for (int r = 0; r < kp; ++r) {
    const Eigen::Index j = S[r];
    for (int cidx = 0; cidx < kq; ++cidx) B(kq + r, kp + cidx) = g.A(T[cidx], j);
    B(kq + r, kp + kq + 1) = -1.0;  // c
  }
  // Normalizations.
  for (int cidx = 0; cidx < kp; ++cidx) B(kp + kq, cidx) = 1.0;
  rhs(kp + kq) = 1.0;
  for (int cidx = 0; cidx < kq; ++cidx) B(kp + kq + 1, kp + cidx) = 1.0;
  rhs(kp + kq + 1) = 1.0;

  CandidateNE cand;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  Vec x = lu.solve(rhs);
  if (!x.allFinite() || (B * x - rhs).lpNorm<Eigen::Infinity>() > kFeasTol) {
    return cand;  // singular or inconsistent system
  }

  Vec p = Vec::Zero(g.n());
  Vec q = Vec::Zero(g.m());
  for (int idx = 0; idx < kp; ++idx) p(S[idx]) = x(idx);
  for (int idx = 0; idx < kq; ++idx) q(T[idx]) = x(kp + idx);
  const double v = x(kp + kq);
  const double c = x(kp + kq + 1);

  if (p.minCoeff() < -kFeasTol || q.minCoeff() < -kFeasTol) return cand;

  // No profitable pure deviation off-support.
  const Vec payoff_q = g.a - g.A * p;       // q picks rows
  const Vec payoff_p = g.A.transpose() * q;  // p picks columns
  for (Eigen::Index i = 0; i < g.m(); ++i) {
    if (payoff_q(i) > v + kFeasTol) return cand;
  }
  for (Eigen::Index j = 0; j < g.n(); ++j) {
    if (payoff_p(j) > c + kFeasTol) return cand;
  }

  p = p.cwiseMax(0.0);
  q = q.cwiseMax(0.0);
  p /= p.sum();
  q /= q.sum();
  cand.p = std::move(p);
  cand.q = std::move(q);
  cand.ok = true;
  cand.v = v;
  return cand;
}

}  // namespace

NashSolution brute_force_ne(const MatrixGame& game) {
  if (game.m() > 5 || game.n() > 5) {
    throw std::runtime_error("brute_force_ne: supported only for m,n <= 5");
  }
  const Eigen::Index m = game.m();
  const Eigen::Index n = game.n();
  for (int total = 2; total <= m + n; ++total) {
    for (int kp = 1; kp <= static_cast<int>(n); ++kp) {
      const int kq = total - kp;
      if (kq < 1 || kq > static_cast<int>(m)) continue;
      for (const auto& S : subsets_of_size(n, kp)) {
        for (const auto& T : subsets_of_size(m, kq)) {
          CandidateNE cand = try_supports(game, S, T);
          if (cand.ok) {
            SimplexVector p = SimplexVector::unchecked(cand.p);
            SimplexVector q = SimplexVector::unchecked(cand.q);
            const double v = game.value(p, q);
            return NashSolution{std::move(p), std::move(q), v};
          }
        }
      }
    }
  }
  throw std::runtime_error("brute_force_ne: no equilibrium found (unexpected)");
}

MatrixGame matching_pennies() {
  Eigen::MatrixXd A(2, 2);
  A << 1, -1, -1, 1;
  return MatrixGame(A, Vec::Zero(2));
}

MatrixGame random_game(Eigen::Index m, Eigen::Index n, rng::Stream& stream) {
  Eigen::MatrixXd A(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = stream.uniform(-1.0, 1.0);
  }
  Vec a(m);
  for (Eigen::Index i = 0; i < m; ++i) a(i) = stream.uniform(-1.0, 1.0);
  return MatrixGame(std::move(A), std::move(a));
}

MatrixGame load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_game: cannot open " + path);
  Eigen::Index m = 0, n = 0;
  if (!(in >> m >> n) || m < 1 || n < 1) {
    throw std::runtime_error("load_game: bad header (expected 'm n')");
  }
  Eigen::MatrixXd A(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(in >> A(i, j))) {
        throw std::runtime_error("load_game: truncated matrix data");
      }
    }
  }
  Vec a(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(in >> a(i))) throw std::runtime_error("load_game: truncated vector a");
  }
  return MatrixGame(std::move(A), std::move(a));
}

void save_game(const MatrixGame& game, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_game: cannot open " + path);
  out << std::setprecision(17);
  out << game.m() << " " << game.n() << "\n";
  for (Eigen::Index i = 0; i < game.m(); ++i) {
    for (Eigen::Index j = 0; j < game.n(); ++j) {
      out << game.A(i, j) << (j + 1 == game.n() ? "" : " ");
    }
    out << "\n";
  }
  for (Eigen::Index i = 0; i < game.m(); ++i) {
    out << game.a(i) << (i + 1 == game.m() ? "" : " ");
  }
  out << "\n";
}

}  // namespace entroprox
