#include "htlb/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "htlb/error.hpp"

namespace htlb {

namespace {

void check_arm(int arm, Eigen::Index n_arms) {
  if (arm < 0 || arm >= n_arms) {
    throw Error(Errc::invalid_arm, "arm " + std::to_string(arm) + " outside [0, " +
                                       std::to_string(n_arms) + ")");
  }
}

}  // namespace

NoiseModel NoiseModel::student_t(double df) {
  if (!(df > 0.0)) throw Error(Errc::invalid_parameter, "student_t: df must be positive");
  NoiseModel m;
  m.kind = Kind::student_t;
  m.df = df;
  return m;
}

NoiseModel NoiseModel::pareto(double shape, double scale, bool centered) {
  if (!(shape > 1.0) || !(scale > 0.0)) {
    throw Error(Errc::invalid_parameter, "pareto: need shape > 1 and scale > 0");
  }
  NoiseModel m;
  m.kind = Kind::pareto;
  m.shape = shape;
  m.scale = scale;
  m.centered = centered;
  return m;
}

double NoiseModel::mean() const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::student_t:
      return 0.0;
    case Kind::pareto:
      return centered ? 0.0 : shape * scale / (shape - 1.0);
  }
  return 0.0;
}

double sample_noise(const NoiseModel& model, Rng& rng) {
  switch (model.kind) {
    case NoiseModel::Kind::none:
      return 0.0;
    case NoiseModel::Kind::student_t: {
      std::normal_distribution<double> normal(0.0, 1.0);
      std::chi_squared_distribution<double> chi2(model.df);
      const double z = normal(rng);
      const double c = chi2(rng);
      return z / std::sqrt(c / model.df);
    }
    case NoiseModel::Kind::pareto: {
      // Inverse CDF on (0, 1]: x_m * U^{-1/s}.
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double u = 1.0 - unif(rng);
      const double x = model.scale * std::pow(u, -1.0 / model.shape);
      return model.centered ? x - model.shape * model.scale / (model.shape - 1.0) : x;
    }
  }
  return 0.0;
}

LinearEnv::LinearEnv(Vector theta, int arms, NoiseModel noise_model)
    : theta_star(std::move(theta)), n_arms(arms), noise(noise_model) {
  if (theta_star.size() < 1 || n_arms < 1) {
    throw Error(Errc::invalid_dimension, "LinearEnv: need d >= 1 and K >= 1");
  }
  if (theta_star.norm() > 1.0 + 1e-12) {
    throw Error(Errc::invalid_parameter, "LinearEnv: ||theta*|| must be at most 1");
  }
}

RoundContexts gen_contexts(Rng& rng, int d, int K) {
  if (d < 1 || K < 1) throw Error(Errc::invalid_dimension, "gen_contexts: need d >= 1, K >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RoundContexts x(K, d);
  for (int a = 0; a < K; ++a) {
    double norm = 0.0;
    // An all-zero row has probability zero but would not normalize.
    do {
      for (int i = 0; i < d; ++i) x(a, i) = unif(rng);
      norm = x.row(a).norm();
    } while (norm == 0.0);
    x.row(a) /= norm;
  }
  return x;
}

Vector make_theta_star(int d) {
  if (d < 1) throw Error(Errc::invalid_dimension, "make_theta_star: d must be positive");
  return Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

double pull(const LinearEnv& env, const RoundContexts& contexts, int arm, Rng& rng) {
  check_arm(arm, contexts.rows());
  if (contexts.cols() != env.dim()) {
    throw Error(Errc::invalid_dimension, "pull: context dimension mismatch");
  }
  return contexts.row(arm).dot(env.theta_star) + sample_noise(env.noise, rng);
}

AdversarialInstance build_adversarial(int d, int K, long T, double eps, Rng& rng) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw Error(Errc::invalid_parameter, "build_adversarial: eps must lie in (0, 1]");
  }
  if (K < 4 || T < K) {
    throw Error(Errc::invalid_parameter, "build_adversarial: need T >= K >= 4");
  }
  if (d < K + 1) {
    throw Error(Errc::instance_infeasible,
                "build_adversarial: need d >= K + 1 for at least one stage");
  }
  AdversarialInstance inst;
  inst.dim = d;
  inst.n_arms = K;
  inst.horizon = T;
  inst.eps = eps;
  inst.gamma = std::pow(static_cast<double>(K) / static_cast<double>(T + 2L * K), 1.0 / (1.0 + eps));
  inst.n_stages = (d - 1) / K;
  inst.stage_len = T / inst.n_stages;
  const double level = std::sqrt(2.0) * std::pow(inst.gamma, eps);
  inst.theta_star = Vector::Zero(d);
  inst.theta_star(0) = level;
  std::uniform_int_distribution<int> pick(0, K - 1);
  inst.good_arms.resize(static_cast<std::size_t>(inst.n_stages));
  for (int j = 0; j < inst.n_stages; ++j) {
    const int good = pick(rng);
    inst.good_arms[static_cast<std::size_t>(j)] = good;
    inst.theta_star(j * K + good + 1) = level;
  }
  return inst;
}

int adversarial_stage(const AdversarialInstance& inst, long t) {
  if (t < 1 || t > inst.horizon) {
    throw Error(Errc::invalid_parameter, "adversarial: round outside [1, T]");
  }
  const long j = (t - 1) / inst.stage_len;
  return static_cast<int>(std::min<long>(j, inst.n_stages - 1));
}

RoundContexts adversarial_contexts(const AdversarialInstance& inst, long t) {
  const int j = adversarial_stage(inst, t);
  const double half = std::sqrt(0.5);
  RoundContexts x = RoundContexts::Zero(inst.n_arms, inst.dim);
  for (int a = 0; a < inst.n_arms; ++a) {
    x(a, 0) = half;
    x(a, j * inst.n_arms + a + 1) = half;
  }
  return x;
}

double adversarial_pull(const AdversarialInstance& inst, long t, int arm, Rng& rng) {
  check_arm(arm, inst.n_arms);
  const RoundContexts x = adversarial_contexts(inst, t);
  const double p = inst.gamma * x.row(arm).dot(inst.theta_star);
  if (p < -1e-15 || p > 1.0) {
    throw Error(Errc::invalid_instance, "adversarial_pull: success probability outside [0, 1]");
  }
  std::bernoulli_distribution success(std::clamp(p, 0.0, 1.0));
  return success(rng) ? 1.0 / inst.gamma : 0.0;
}

Vector expected_payoffs(const RoundContexts& contexts, const Vector& theta_star) {
  if (contexts.cols() != theta_star.size()) {
    throw Error(Errc::invalid_dimension, "expected_payoffs: dimension mismatch");
  }
  return contexts * theta_star;
}

double instant_regret(const RoundContexts& contexts, const Vector& theta_star, int arm) {
  check_arm(arm, contexts.rows());
  const Vector means = expected_payoffs(contexts, theta_star);
  return means.maxCoeff() - means(arm);
}

double instant_regret(const LinearEnv& env, const RoundContexts& contexts, int arm) {
  return instant_regret(contexts, env.theta_star, arm);
}

double instant_regret(const AdversarialInstance& inst, const RoundContexts& contexts, int arm) {
  return instant_regret(contexts, inst.theta_star, arm);
}

}  // namespace htlb
