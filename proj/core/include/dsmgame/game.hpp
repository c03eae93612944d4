#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsmgame/load_shift.hpp"

namespace dsm {

// Ordered list of the start hours a customer may choose (sentinel included).
using ActionSet = std::vector<int>;

// A finite N-player cost game in normal form. `costs` holds one N-vector of
// costs per joint action, laid out row-major with player 0 as the most
// significant digit of the joint index. The table knows nothing about the
// load model, so analytic test games can be built directly.
class GameTable {
 public:
  GameTable(std::vector<ActionSet> action_sets, std::vector<double> costs);

  int num_players() const { return static_cast<int>(action_sets_.size()); }
  std::size_t num_joint_actions() const { return num_joint_; }
  const std::vector<ActionSet>& action_sets() const { return action_sets_; }
  const ActionSet& actions_of(int player) const { return action_sets_[player]; }

  double cost(std::size_t joint_index, int player) const {
    return costs_[joint_index * action_sets_.size() + player];
  }
  const std::vector<double>& costs() const { return costs_; }

  // Joint index from per-player positions within each action set.
  std::size_t index_of(const std::vector<int>& action_positions) const;
  // Inverse of index_of.
  std::vector<int> positions_of(std::size_t joint_index) const;
  // Position of an action value within a player's set; throws if absent.
  int position_of_action(int player, int action_value) const;

  // max - min over every cost entry; the scale for relative epsilon checks.
  double cost_spread() const;

 private:
  std::vector<ActionSet> action_sets_;
  std::vector<double> costs_;
  std::vector<std::size_t> strides_;
  std::size_t num_joint_ = 0;
};

// Tabulates the electricity bill of every customer at every joint action.
// Refuses products of action-set sizes above `max_joint_actions`.
GameTable dsm_game_build(const std::vector<LoadProfile>& profiles,
                         const TargetProfile& target, const ShiftParams& params,
                         const std::vector<ActionSet>& action_sets,
                         std::size_t max_joint_actions = 1000000);

// Prelec probability weighting w(s) = exp(-(-ln s)^alpha) for alpha in (0,1],
// extended with w(0)=0 and w(1)=1. alpha=1 returns s unchanged.
double prelec_weight(double sigma, double alpha);

// Per-customer distortion parameters, each in (0,1]. A customer observes all
// of its opponents through its own parameter.
struct WeightingSpec {
  std::vector<double> alpha;
};

// A point on the product of simplices: one probability vector per player over
// that player's action set. Validated on construction.
class MixedStrategyProfile {
 public:
  explicit MixedStrategyProfile(std::vector<std::vector<double>> probs);

  static MixedStrategyProfile uniform(const GameTable& game);

  int num_players() const { return static_cast<int>(probs_.size()); }
  const std::vector<double>& of(int player) const { return probs_[player]; }
  const std::vector<std::vector<double>>& probs() const { return probs_; }

 private:
  std::vector<std::vector<double>> probs_;
};

// Selects how expected costs are evaluated: objective opponent probabilities
// (EUT) or Prelec-weighted ones (PT).
struct EvalMode {
  bool weighted = false;
  WeightingSpec weights;

  static EvalMode eut() { return {}; }
  static EvalMode pt(WeightingSpec w) { return {true, std::move(w)}; }
};

// Expected cost of player i under objective probabilities (the full product
// expectation over all joint actions).
double eut_cost(int player, const MixedStrategyProfile& profile, const GameTable& game);

// Prospect-theoretic expected cost: the player's own probability stays
// objective while every opponent probability passes through the player's
// Prelec weight. The weighted terms are deliberately not renormalized.
double pt_cost(int player, const MixedStrategyProfile& profile, const GameTable& game,
               const WeightingSpec& weights);

// Expected cost of playing the pure action `action_value` against the other
// players' mixed strategies (profile.of(player) itself is ignored).
double cond_cost(int player, int action_value, const MixedStrategyProfile& profile,
                 const GameTable& game, const EvalMode& mode);

// Conditional costs of every action of `player` in action-set order.
std::vector<double> cond_costs(int player, const MixedStrategyProfile& profile,
                               const GameTable& game, const EvalMode& mode);

struct EpsilonReport {
  std::vector<double> per_player;
  double max_eps = 0.0;
};

// Brute-force epsilon-Nash certificate: for each player, the gap between its
// mixed expected cost and its best pure deviation. The profile is an
// epsilon-NE for every epsilon >= max_eps.
EpsilonReport epsilon_of_profile(const MixedStrategyProfile& profile,
                                 const GameTable& game, const EvalMode& mode);

}  // namespace dsm
