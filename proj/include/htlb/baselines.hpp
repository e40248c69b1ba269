#pragma once

// Comparison policies. All four keep one unfiltered history over every past
// round and play greedy UCB: argmax x^T theta + (alpha + 1) sqrt(x^T A^{-1} x).
// They differ only in how theta is estimated:
//   mom  - ridge regression on the element median of r replicated payoffs
//   crt  - ridge regression on payoffs zeroed when |r| > t^{1/(2(1+eps))}
//   menu - r ridge estimates, keep the one with the smallest median
//          A-distance to the others
//   tofu - per-coordinate truncation in the A^{-1/2} V^T basis

#include <optional>
#include <span>
#include <vector>

#include "htlb/environment.hpp"
#include "htlb/estimators.hpp"

namespace htlb {

enum class BaselineKind { mom, crt, menu, tofu };

struct BaselineParams {
  BaselineKind kind = BaselineKind::mom;
  long T = 10000;
  int K = 20;
  int d = 10;
  double eps = 1.0;
  double delta = 0.01;
  double v = 3.0;
  std::optional<double> tofu_cb;  // defaults to (v / ln(2 d T / delta))^{1/(1+eps)}
};

struct BaselineState {
  BaselineParams params;
  int r = 1;  // payoffs per decision round
  GramState gram;
  std::vector<double> contexts;  // n x d row-major
  std::vector<double> payoffs;   // n x stored_width row-major
  Matrix b;                      // d x stored_width, sum of y x
  long rounds = 0;
  long pull_budget_used = 0;

  /// Number of payoff values kept per round (r for menu, else 1).
  int stored_width() const { return static_cast<int>(b.cols()); }
  Eigen::Map<const RowMatrix> context_matrix() const;
  Eigen::Map<const RowMatrix> payoff_matrix() const;
};

BaselineState baseline_init(const BaselineParams& params);

double baseline_alpha(const BaselineState& state, long t);

/// Per-arm (r_hat, width) for the next decision round.
std::vector<ArmEstimate> baseline_estimate(const BaselineState& state,
                                           const RoundContexts& contexts);

/// UCB choice; ties go to the lowest arm index.
int baseline_select(const BaselineState& state, const RoundContexts& contexts);

void baseline_record(BaselineState& state, const RoundContexts& contexts, int arm,
                     std::span<const double> payoffs);

/// The value MoM stores for one round: element median of the replications.
double mom_store_value(std::span<const double> payoffs);

/// eta_t = t^{1/(2(1+eps))}
double crt_threshold(long t, double eps);
double crt_truncate(double payoff, long t, double eps);

/// k* = argmin_j median_s ||theta^j - theta^s||_A, ties to the lowest j.
/// `thetas` is d x r.
int menu_select(const Matrix& thetas, const Matrix& a);

double tofu_default_cb(double v, int d, long T, double delta, double eps);
double tofu_threshold(long t, double eps, double cb);

/// theta' = A^{-1/2} [u^i . Ybar^i]_i with [u^1..u^d] = A^{-1/2} V^T.
Vector tofu_estimate(const Matrix& a, const Eigen::Ref<const RowMatrix>& v,
                     const Eigen::Ref<const Vector>& y, double b_t);

/// Symmetric inverse square root via eigendecomposition.
Matrix inverse_sqrt_spd(const Matrix& a);

}  // namespace htlb
