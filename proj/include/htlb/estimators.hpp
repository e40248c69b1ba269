#pragma once

// Confidence-interval constructors over one stage's history.
//
//   BMM: r parallel ridge estimates theta^j = A^{-1} b^j, per arm the element
//        median of x^T theta^j.
//   BTC: per arm, weights beta = x^T A^{-1} V^T; samples whose |beta_tau r_tau|
//        exceeds h = ||beta||_{1+eps} are dropped from x^T A^{-1} V^T Y.
//
// Both report width (alpha + 1) sqrt(x^T A^{-1} x).

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "htlb/environment.hpp"
#include "htlb/linalg.hpp"

namespace htlb {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Contexts and payoff records of the rounds assigned to one stage.
/// Each record holds `replications` payoffs (1 for scalar records).
class StageHistory {
 public:
  StageHistory(int dim, int replications);

  int dim() const { return dim_; }
  int replications() const { return replications_; }
  std::size_t size() const { return gram_.n_updates; }
  bool empty() const { return size() == 0; }

  const GramState& gram() const { return gram_; }

  /// |Psi| x d, row tau = stored context.
  Eigen::Map<const RowMatrix> contexts() const;
  /// |Psi| x r, row tau = payoff record.
  Eigen::Map<const RowMatrix> payoffs() const;
  /// d x r, column j = sum_tau r^j_tau x_tau.
  const Matrix& b_vectors() const { return b_; }

  void append(const Eigen::Ref<const Vector>& x, std::span<const double> payoff_record);

 private:
  int dim_;
  int replications_;
  GramState gram_;
  std::vector<double> contexts_;
  std::vector<double> payoffs_;
  Matrix b_;
};

struct ArmEstimate {
  int arm = 0;
  double r_hat = 0.0;
  double width = 0.0;

  double ucb() const { return r_hat + width; }
};

/// (12 v)^{1/(1+eps)} t^{(1-eps)/(2(1+eps))}
double alpha_bmm(long t, double eps, double v);

/// (2/3 L + sqrt(2 L v) + v) t^{(1-eps)/(2(1+eps))}, L = ln(2 T K ln T / delta)
double alpha_btc(long t, double eps, double v, long T, int K, double delta);

/// ceil(8 ln(2 K T ln T / delta)), bumped to the next odd integer.
int replication_count(long T, int K, double delta);

/// Estimates for the listed arms (all arms when `arms` is empty).
std::vector<ArmEstimate> bmm_estimate(const StageHistory& hist, const RoundContexts& contexts,
                                      double alpha_t, std::span<const int> arms = {});

/// h = ||x^T A^{-1} V^T||_{1+eps}; zero on an empty history.
double btc_truncation_level(const StageHistory& hist, const Eigen::Ref<const Vector>& x,
                            double eps);

std::vector<ArmEstimate> btc_estimate(const StageHistory& hist, const RoundContexts& contexts,
                                      double alpha_t, double eps, std::span<const int> arms = {});

/// Truncated weighted sum sum_tau beta_tau y_tau 1{|beta_tau y_tau| <= h}.
double truncated_prediction(const Eigen::Ref<const Vector>& beta,
                            const Eigen::Ref<const Vector>& payoffs, double h);

void check_eps(double eps);

}  // namespace htlb
