#pragma once

// Payoff generators: the linear environment with additive heavy-tailed noise
// and the Bernoulli {0, 1/gamma} instance used as a regret floor.
//
// Arms are 0-based throughout the C++ API.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace htlb {

using Rng = std::mt19937_64;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// K x d, row a holds the features of arm a for the current round.
using RoundContexts = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NoiseModel {
  enum class Kind { none, student_t, pareto };

  Kind kind = Kind::none;
  double df = 3.0;       // student_t
  double shape = 3.0;    // pareto
  double scale = 0.01;   // pareto
  bool centered = false; // pareto: subtract shape*scale/(shape-1)

  static NoiseModel zero() { return {}; }
  static NoiseModel student_t(double df);
  static NoiseModel pareto(double shape, double scale, bool centered = false);

  /// Expected value of one draw.
  double mean() const;
};

double sample_noise(const NoiseModel& model, Rng& rng);

struct LinearEnv {
  LinearEnv(Vector theta_star, int n_arms, NoiseModel noise);

  int dim() const { return static_cast<int>(theta_star.size()); }

  Vector theta_star;
  int n_arms;
  NoiseModel noise;
};

/// Each entry iid Uniform[0,1], then every row scaled to unit length.
RoundContexts gen_contexts(Rng& rng, int d, int K);

/// The all-ones direction 1/sqrt(d).
Vector make_theta_star(int d);

/// contexts[arm] . theta* + noise
double pull(const LinearEnv& env, const RoundContexts& contexts, int arm, Rng& rng);

struct AdversarialInstance {
  int dim = 0;
  int n_arms = 0;
  long horizon = 0;
  double eps = 1.0;
  double gamma = 0.0;
  int n_stages = 0;   // floor((d-1)/K)
  long stage_len = 0; // floor(T / n_stages)
  std::vector<int> good_arms;  // 0-based hidden good arm per stage
  Vector theta_star;
};

AdversarialInstance build_adversarial(int d, int K, long T, double eps, Rng& rng);

/// 0-based stage of 1-based round t. Rounds past the last full stage stay in it.
int adversarial_stage(const AdversarialInstance& inst, long t);

/// Features at round t: feature 0 and feature (j*K + a + 1) equal sqrt(1/2).
RoundContexts adversarial_contexts(const AdversarialInstance& inst, long t);

/// 1/gamma with probability gamma * x_{t,arm}^T theta*, else 0.
double adversarial_pull(const AdversarialInstance& inst, long t, int arm, Rng& rng);

/// Expected payoff x^T theta* of every arm.
Vector expected_payoffs(const RoundContexts& contexts, const Vector& theta_star);

/// max_a x_a^T theta* - x_arm^T theta* (pseudo-regret of one pull).
double instant_regret(const RoundContexts& contexts, const Vector& theta_star, int arm);
double instant_regret(const LinearEnv& env, const RoundContexts& contexts, int arm);
double instant_regret(const AdversarialInstance& inst, const RoundContexts& contexts, int arm);

}  // namespace htlb
