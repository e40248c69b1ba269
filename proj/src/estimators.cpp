#include "htlb/estimators.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "htlb/error.hpp"

namespace htlb {

namespace {

double t_power(long t, double eps) {
  return std::pow(static_cast<double>(t), (1.0 - eps) / (2.0 * (1.0 + eps)));
}

double log_term(long T, int K, double delta) {
  const double Td = static_cast<double>(T);
  return std::log(2.0 * Td * static_cast<double>(K) * std::log(Td) / delta);
}

void check_horizon_terms(long T, int K, double delta) {
  if (T < 3) throw Error(Errc::invalid_parameter, "horizon T must be at least 3");
  if (K < 1) throw Error(Errc::invalid_parameter, "K must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(Errc::invalid_parameter, "delta must lie in (0, 1)");
  }
}

std::vector<int> resolve_arms(std::span<const int> arms, Eigen::Index n_arms) {
  std::vector<int> out;
  if (arms.empty()) {
    out.resize(static_cast<std::size_t>(n_arms));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  out.assign(arms.begin(), arms.end());
  for (int a : out) {
    if (a < 0 || a >= n_arms) throw Error(Errc::invalid_arm, "estimate: arm out of range");
  }
  return out;
}

void check_contexts(const StageHistory& hist, const RoundContexts& contexts) {
  if (contexts.cols() != hist.dim()) {
    throw Error(Errc::invalid_dimension, "estimate: context dimension does not match history");
  }
}

}  // namespace

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(Errc::invalid_parameter, "eps must lie in (0, 1]");
  }
}

StageHistory::StageHistory(int dim, int replications)
    : dim_(dim), replications_(replications), gram_(gram_init(dim)) {
  if (replications < 1) {
    throw Error(Errc::invalid_parameter, "StageHistory: replications must be positive");
  }
  b_ = Matrix::Zero(dim, replications);
}

Eigen::Map<const RowMatrix> StageHistory::contexts() const {
  return {contexts_.data(), static_cast<Eigen::Index>(size()), dim_};
}

Eigen::Map<const RowMatrix> StageHistory::payoffs() const {
  return {payoffs_.data(), static_cast<Eigen::Index>(size()), replications_};
}

void StageHistory::append(const Eigen::Ref<const Vector>& x, std::span<const double> record) {
  if (x.size() != dim_) throw Error(Errc::invalid_dimension, "StageHistory: context dimension");
  if (record.size() != static_cast<std::size_t>(replications_)) {
    throw Error(Errc::invalid_record, "StageHistory: payoff record has " +
                                          std::to_string(record.size()) + " entries, expected " +
                                          std::to_string(replications_));
  }
  gram_update_inplace(gram_, x);
  contexts_.insert(contexts_.end(), x.data(), x.data() + dim_);
  payoffs_.insert(payoffs_.end(), record.begin(), record.end());
  const Eigen::Map<const Eigen::RowVectorXd> r(record.data(), replications_);
  b_.noalias() += x * r;
}

double alpha_bmm(long t, double eps, double v) {
  check_eps(eps);
  if (t < 1) throw Error(Errc::invalid_parameter, "alpha_bmm: t must be positive");
  if (!(v > 0.0)) throw Error(Errc::invalid_parameter, "alpha_bmm: v must be positive");
  return std::pow(12.0 * v, 1.0 / (1.0 + eps)) * t_power(t, eps);
}

double alpha_btc(long t, double eps, double v, long T, int K, double delta) {
  check_eps(eps);
  check_horizon_terms(T, K, delta);
  if (t < 1) throw Error(Errc::invalid_parameter, "alpha_btc: t must be positive");
  if (!(v > 0.0)) throw Error(Errc::invalid_parameter, "alpha_btc: v must be positive");
  const double L = log_term(T, K, delta);
  return (2.0 / 3.0 * L + std::sqrt(2.0 * L * v) + v) * t_power(t, eps);
}

int replication_count(long T, int K, double delta) {
  check_horizon_terms(T, K, delta);
  int r = static_cast<int>(std::ceil(8.0 * log_term(T, K, delta)));
  if (r % 2 == 0) ++r;
  return r;
}

std::vector<ArmEstimate> bmm_estimate(const StageHistory& hist, const RoundContexts& contexts,
                                      double alpha_t, std::span<const int> arms) {
  check_contexts(hist, contexts);
  const std::vector<int> which = resolve_arms(arms, contexts.rows());
  const GramState& g = hist.gram();
  // d x r, column j is theta^j.
  const Matrix thetas = g.a_inv * hist.b_vectors();

  std::vector<ArmEstimate> out;
  out.reserve(which.size());
  Eigen::RowVectorXd preds(hist.replications());
  for (int a : which) {
    preds.noalias() = contexts.row(a) * thetas;
    const double r_hat = lower_median(preds).value;
    out.push_back({a, r_hat, (alpha_t + 1.0) * quad_width(g, contexts.row(a).transpose())});
  }
  return out;
}

double btc_truncation_level(const StageHistory& hist, const Eigen::Ref<const Vector>& x,
                            double eps) {
  check_eps(eps);
  if (x.size() != hist.dim()) throw Error(Errc::invalid_dimension, "btc: dimension mismatch");
  if (hist.empty()) return 0.0;
  const Vector beta = hist.contexts() * (hist.gram().a_inv * x);
  return p_norm(beta, 1.0 + eps);
}

double truncated_prediction(const Eigen::Ref<const Vector>& beta,
                            const Eigen::Ref<const Vector>& payoffs, double h) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double term = beta(i) * payoffs(i);
    if (std::abs(term) <= h) acc += term;
  }
  return acc;
}

std::vector<ArmEstimate> btc_estimate(const StageHistory& hist, const RoundContexts& contexts,
                                      double alpha_t, double eps, std::span<const int> arms) {
  check_eps(eps);
  check_contexts(hist, contexts);
  if (hist.replications() != 1) {
    throw Error(Errc::invalid_record, "btc_estimate: history must hold scalar payoffs");
  }
  const std::vector<int> which = resolve_arms(arms, contexts.rows());
  const GramState& g = hist.gram();

  std::vector<ArmEstimate> out;
  out.reserve(which.size());
  if (hist.empty()) {
    for (int a : which) {
      out.push_back({a, 0.0, (alpha_t + 1.0) * quad_width(g, contexts.row(a).transpose())});
    }
    return out;
  }

  const auto m = static_cast<Eigen::Index>(which.size());
  Matrix x_sel(hist.dim(), m);
  for (Eigen::Index k = 0; k < m; ++k) x_sel.col(k) = contexts.row(which[k]).transpose();
  // |Psi| x m, column k holds beta for arm which[k].
  const Matrix betas = hist.contexts() * (g.a_inv * x_sel);
  const Vector y = hist.payoffs().col(0);

  for (Eigen::Index k = 0; k < m; ++k) {
    const double h = p_norm(betas.col(k), 1.0 + eps);
    const double r_hat = truncated_prediction(betas.col(k), y, h);
    out.push_back({which[k], r_hat, (alpha_t + 1.0) * quad_width(g, x_sel.col(k))});
  }
  return out;
}

}  // namespace htlb
