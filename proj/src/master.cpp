#include "htlb/master.hpp"

#include <cmath>
#include <string>

#include "htlb/error.hpp"

namespace htlb {

namespace {

std::vector<ArmEstimate> stage_estimates(const MasterState& state, int s,
                                         const RoundContexts& contexts, double alpha,
                                         std::span<const int> arms) {
  const StageHistory& hist = state.stages[static_cast<std::size_t>(s - 1)];
  if (state.params.variant == Variant::bmm) return bmm_estimate(hist, contexts, alpha, arms);
  return btc_estimate(hist, contexts, alpha, state.params.eps, arms);
}

// Lowest arm index wins ties; estimates are ordered by arm index.
const ArmEstimate& best_ucb(const std::vector<ArmEstimate>& est) {
  const ArmEstimate* best = &est.front();
  for (const ArmEstimate& e : est) {
    if (e.ucb() > best->ucb()) best = &e;
  }
  return *best;
}

}  // namespace

MasterState master_init(const MasterParams& p) {
  if (p.T < 3) {
    throw Error(Errc::invalid_horizon, "master_init: T must be at least 3 so that floor(ln T) >= 1");
  }
  if (p.K < 1 || p.d < 1) throw Error(Errc::invalid_parameter, "master_init: need K, d >= 1");
  check_eps(p.eps);
  if (!(p.delta > 0.0 && p.delta < 1.0)) {
    throw Error(Errc::invalid_parameter, "master_init: delta must lie in (0, 1)");
  }
  if (!(p.v > 0.0)) throw Error(Errc::invalid_parameter, "master_init: v must be positive");

  MasterState state;
  state.params = p;
  state.S = static_cast<int>(std::floor(std::log(static_cast<double>(p.T))));
  state.r = p.variant == Variant::bmm ? replication_count(p.T, p.K, p.delta) : 1;
  state.stages.reserve(static_cast<std::size_t>(state.S));
  for (int s = 0; s < state.S; ++s) state.stages.emplace_back(p.d, state.r);
  return state;
}

double master_alpha(const MasterState& state, long t) {
  const MasterParams& p = state.params;
  const long at = p.horizon_alpha ? p.T : t;
  if (p.variant == Variant::bmm) return alpha_bmm(at, p.eps, p.v);
  return alpha_btc(at, p.eps, p.v, p.T, p.K, p.delta);
}

Decision select_arm(const MasterState& state, const RoundContexts& contexts) {
  const MasterParams& p = state.params;
  if (contexts.rows() != p.K || contexts.cols() != p.d) {
    throw Error(Errc::invalid_dimension, "select_arm: contexts must be K x d");
  }
  const double alpha = master_alpha(state, state.rounds + 1);
  const double exploit_width = 1.0 / std::sqrt(static_cast<double>(p.T));

  std::vector<int> active(static_cast<std::size_t>(p.K));
  for (int a = 0; a < p.K; ++a) active[static_cast<std::size_t>(a)] = a;

  std::vector<ArmEstimate> est;
  for (int s = 1; s <= state.S; ++s) {
    est = stage_estimates(state, s, contexts, alpha, active);

    bool all_narrow = true;
    for (const ArmEstimate& e : est) all_narrow = all_narrow && e.width <= exploit_width;
    if (all_narrow) {
      return {best_ucb(est).arm, s, DecisionCase::exploit, std::nullopt, false};
    }

    const double stage_width = std::ldexp(1.0, -s);
    const ArmEstimate* pick = nullptr;
    for (const ArmEstimate& e : est) {
      if (e.width <= stage_width) continue;
      if (pick == nullptr) {
        pick = &e;
      } else if (p.explore_rule == ExploreRule::widest ? e.width > pick->width
                                                        : e.ucb() > pick->ucb()) {
        pick = &e;
      }
    }
    if (pick != nullptr) {
      return {pick->arm, s, DecisionCase::explore, s, false};
    }

    const double cutoff = best_ucb(est).ucb() - 2.0 * stage_width;
    std::vector<int> next;
    for (const ArmEstimate& e : est) {
      if (e.ucb() >= cutoff) next.push_back(e.arm);
    }
    active = std::move(next);
  }
  // Every stage resolved to a filter step; exploit over the last stage's estimates.
  return {best_ucb(est).arm, state.S, DecisionCase::exploit, std::nullopt, true};
}

void record(MasterState& state, const Decision& decision, const RoundContexts& contexts,
            std::span<const double> payoffs) {
  if (payoffs.size() != static_cast<std::size_t>(state.r)) {
    throw Error(Errc::invalid_record, "record: expected " + std::to_string(state.r) +
                                          " payoffs, got " + std::to_string(payoffs.size()));
  }
  if (decision.arm < 0 || decision.arm >= contexts.rows()) {
    throw Error(Errc::invalid_arm, "record: arm out of range");
  }
  if (decision.kind == DecisionCase::explore) {
    if (!decision.record_stage || *decision.record_stage < 1 || *decision.record_stage > state.S) {
      throw Error(Errc::invalid_record, "record: explore decision without a valid stage");
    }
    state.stages[static_cast<std::size_t>(*decision.record_stage - 1)].append(
        contexts.row(decision.arm).transpose(), payoffs);
  }
  ++state.rounds;
  state.pull_budget_used += state.r;
}

}  // namespace htlb
