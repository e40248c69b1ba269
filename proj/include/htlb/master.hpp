#pragma once

// Stage-wise arm screening shared by SupBMM and SupBTC.
//
// Each round walks stages s = 1..S. At stage s the stage's own history gives
// (r_hat, w) for the surviving arms; then
//   all w <= 1/sqrt(T)  -> exploit argmax r_hat + w, nothing is recorded;
//   some w > 2^{-s}     -> explore that arm, the round joins stage s only;
//   otherwise           -> keep arms within 2^{1-s} of the best UCB, s += 1.
// Payoffs stored at stage s never influence whether their own round was
// recorded there, which keeps each stage's samples independent.

#include <optional>
#include <span>
#include <vector>

#include "htlb/environment.hpp"
#include "htlb/estimators.hpp"

namespace htlb {

enum class Variant { bmm, btc };

/// Which qualifying arm an explore step plays.
enum class ExploreRule { widest, highest_ucb };

struct MasterParams {
  Variant variant = Variant::bmm;
  long T = 10000;
  int K = 20;
  int d = 10;
  double eps = 1.0;
  double delta = 0.01;
  double v = 3.0;
  ExploreRule explore_rule = ExploreRule::widest;
  /// Evaluate alpha with the horizon T instead of the current round t.
  bool horizon_alpha = false;
};

enum class DecisionCase { exploit, explore };

struct Decision {
  int arm = 0;
  int stage = 1;  // 1-based stage at which the loop stopped
  DecisionCase kind = DecisionCase::exploit;
  std::optional<int> record_stage;  // set only for explore
  bool overflow = false;            // loop ran past stage S
};

struct MasterState {
  MasterParams params;
  int S = 0;
  int r = 1;  // payoffs per decision round
  std::vector<StageHistory> stages;
  long rounds = 0;  // completed decision rounds
  long pull_budget_used = 0;
};

MasterState master_init(const MasterParams& params);

/// Confidence parameter for decision round t under the state's variant.
double master_alpha(const MasterState& state, long t);

/// Chooses the arm for decision round state.rounds + 1. Reads only stage
/// histories and the current contexts.
Decision select_arm(const MasterState& state, const RoundContexts& contexts);

/// Stores the round's payoffs when the decision explored; always charges the budget.
void record(MasterState& state, const Decision& decision, const RoundContexts& contexts,
            std::span<const double> payoffs);

}  // namespace htlb
