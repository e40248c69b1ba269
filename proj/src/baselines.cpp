#include "htlb/baselines.hpp"

#include <cmath>
#include <string>

#include "htlb/error.hpp"

namespace htlb {

namespace {

bool replicated(BaselineKind kind) { return kind == BaselineKind::mom || kind == BaselineKind::menu; }

double tofu_cb(const BaselineParams& p) {
  return p.tofu_cb ? *p.tofu_cb : tofu_default_cb(p.v, p.d, p.T, p.delta, p.eps);
}

}  // namespace

Eigen::Map<const RowMatrix> BaselineState::context_matrix() const {
  return {contexts.data(), static_cast<Eigen::Index>(gram.n_updates), gram.dim()};
}

Eigen::Map<const RowMatrix> BaselineState::payoff_matrix() const {
  return {payoffs.data(), static_cast<Eigen::Index>(gram.n_updates), b.cols()};
}

BaselineState baseline_init(const BaselineParams& p) {
  if (p.T < 3) throw Error(Errc::invalid_horizon, "baseline_init: T must be at least 3");
  if (p.K < 1 || p.d < 1) throw Error(Errc::invalid_parameter, "baseline_init: need K, d >= 1");
  check_eps(p.eps);
  if (!(p.delta > 0.0 && p.delta < 1.0)) {
    throw Error(Errc::invalid_parameter, "baseline_init: delta must lie in (0, 1)");
  }
  if (!(p.v > 0.0)) throw Error(Errc::invalid_parameter, "baseline_init: v must be positive");

  BaselineState s;
  s.params = p;
  s.r = replicated(p.kind) ? replication_count(p.T, p.K, p.delta) : 1;
  s.gram = gram_init(p.d);
  s.b = Matrix::Zero(p.d, p.kind == BaselineKind::menu ? s.r : 1);
  return s;
}

double baseline_alpha(const BaselineState& state, long t) {
  const BaselineParams& p = state.params;
  if (replicated(p.kind)) return alpha_bmm(t, p.eps, p.v);
  return alpha_btc(t, p.eps, p.v, p.T, p.K, p.delta);
}

std::vector<ArmEstimate> baseline_estimate(const BaselineState& state,
                                           const RoundContexts& contexts) {
  const BaselineParams& p = state.params;
  if (contexts.cols() != p.d) throw Error(Errc::invalid_dimension, "baseline: context dimension");
  const long t = state.rounds + 1;

  Vector theta;
  switch (p.kind) {
    case BaselineKind::mom:
    case BaselineKind::crt:
      theta = state.gram.a_inv * state.b.col(0);
      break;
    case BaselineKind::menu: {
      const Matrix thetas = state.gram.a_inv * state.b;
      theta = thetas.col(menu_select(thetas, state.gram.a));
      break;
    }
    case BaselineKind::tofu: {
      if (state.gram.n_updates == 0) {
        theta = Vector::Zero(p.d);
      } else {
        theta = tofu_estimate(state.gram.a, state.context_matrix(), state.payoff_matrix().col(0),
                              tofu_threshold(t, p.eps, tofu_cb(p)));
      }
      break;
    }
  }

  const double alpha = baseline_alpha(state, t);
  std::vector<ArmEstimate> out;
  out.reserve(static_cast<std::size_t>(contexts.rows()));
  for (int a = 0; a < contexts.rows(); ++a) {
    const auto x = contexts.row(a).transpose();
    out.push_back({a, x.dot(theta), (alpha + 1.0) * quad_width(state.gram, x)});
  }
  return out;
}

int baseline_select(const BaselineState& state, const RoundContexts& contexts) {
  const std::vector<ArmEstimate> est = baseline_estimate(state, contexts);
  int best = 0;
  for (const ArmEstimate& e : est) {
    if (e.ucb() > est[static_cast<std::size_t>(best)].ucb()) best = e.arm;
  }
  return best;
}

void baseline_record(BaselineState& state, const RoundContexts& contexts, int arm,
                     std::span<const double> payoffs) {
  const BaselineParams& p = state.params;
  if (payoffs.size() != static_cast<std::size_t>(state.r)) {
    throw Error(Errc::invalid_record, "baseline_record: expected " + std::to_string(state.r) +
                                          " payoffs, got " + std::to_string(payoffs.size()));
  }
  if (arm < 0 || arm >= contexts.rows()) throw Error(Errc::invalid_arm, "baseline_record: arm");
  const long t = state.rounds + 1;
  const Vector x = contexts.row(arm).transpose();

  gram_update_inplace(state.gram, x);
  state.contexts.insert(state.contexts.end(), x.data(), x.data() + x.size());
  switch (p.kind) {
    case BaselineKind::mom: {
      const double y = mom_store_value(payoffs);
      state.payoffs.push_back(y);
      state.b.col(0) += y * x;
      break;
    }
    case BaselineKind::crt: {
      const double y = crt_truncate(payoffs[0], t, p.eps);
      state.payoffs.push_back(y);
      state.b.col(0) += y * x;
      break;
    }
    case BaselineKind::menu: {
      state.payoffs.insert(state.payoffs.end(), payoffs.begin(), payoffs.end());
      const Eigen::Map<const Eigen::RowVectorXd> y(payoffs.data(), state.r);
      state.b.noalias() += x * y;
      break;
    }
    case BaselineKind::tofu:
      state.payoffs.push_back(payoffs[0]);
      state.b.col(0) += payoffs[0] * x;
      break;
  }
  ++state.rounds;
  state.pull_budget_used += state.r;
}

double mom_store_value(std::span<const double> payoffs) { return lower_median(payoffs).value; }

double crt_threshold(long t, double eps) {
  check_eps(eps);
  return std::pow(static_cast<double>(t), 1.0 / (2.0 * (1.0 + eps)));
}

double crt_truncate(double payoff, long t, double eps) {
  return std::abs(payoff) <= crt_threshold(t, eps) ? payoff : 0.0;
}

int menu_select(const Matrix& thetas, const Matrix& a) {
  const Eigen::Index r = thetas.cols();
  if (r == 0) throw Error(Errc::empty_input, "menu_select: no estimators");
  const Matrix gram = thetas.transpose() * a * thetas;
  // Filled once per pair so equal distances compare equal from either end.
  Matrix dist = Matrix::Zero(r, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index s = j + 1; s < r; ++s) {
      const double sq = gram(j, j) + gram(s, s) - gram(j, s) - gram(s, j);
      dist(j, s) = dist(s, j) = std::sqrt(std::max(sq, 0.0));
    }
  }
  int best = 0;
  double best_m = 0.0;
  for (Eigen::Index j = 0; j < r; ++j) {
    const double m = lower_median(dist.col(j)).value;
    if (j == 0 || m < best_m) {
      best = static_cast<int>(j);
      best_m = m;
    }
  }
  return best;
}

double tofu_default_cb(double v, int d, long T, double delta, double eps) {
  const double L = std::log(2.0 * d * static_cast<double>(T) / delta);
  return std::pow(v / L, 1.0 / (1.0 + eps));
}

double tofu_threshold(long t, double eps, double cb) {
  check_eps(eps);
  return cb * std::pow(static_cast<double>(t), (1.0 - eps) / (2.0 * (1.0 + eps)));
}

Matrix inverse_sqrt_spd(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) {
    throw Error(Errc::numeric_degeneracy, "inverse_sqrt_spd: eigendecomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 1e-12 * std::max(1.0, lambda.maxCoeff())) {
    throw Error(Errc::numeric_degeneracy, "inverse_sqrt_spd: matrix is not positive definite");
  }
  return eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Vector tofu_estimate(const Matrix& a, const Eigen::Ref<const RowMatrix>& v,
                     const Eigen::Ref<const Vector>& y, double b_t) {
  if (v.rows() != y.size() || v.cols() != a.rows()) {
    throw Error(Errc::invalid_dimension, "tofu_estimate: shape mismatch");
  }
  const Matrix root = inverse_sqrt_spd(a);
  // d x n, row i is u^i.
  const Matrix u = root * v.transpose();
  Vector sums(a.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    sums(i) = truncated_prediction(u.row(i).transpose(), y, b_t);
  }
  return root * sums;
}

}  // namespace htlb
