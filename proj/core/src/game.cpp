#include "dsmgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace dsm {

namespace {

void validate_action_sets(const std::vector<ActionSet>& sets) {
  if (sets.empty()) throw ValidationError("game: at least one player required");
  for (const auto& set : sets) {
    if (set.empty()) throw ValidationError("game: empty action set");
    for (std::size_t j = 1; j < set.size(); ++j) {
      if (set[j] <= set[j - 1]) {
        throw ValidationError("game: action sets must be strictly increasing");
      }
    }
  }
}

// Walks every joint action without div/mod: `digits` are per-player positions.
struct JointOdometer {
  explicit JointOdometer(const std::vector<ActionSet>& sets)
      : sizes(sets.size()), digits(sets.size(), 0) {
    for (std::size_t i = 0; i < sets.size(); ++i) sizes[i] = static_cast<int>(sets[i].size());
  }
  bool advance() {
    for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
      if (++digits[i] < sizes[i]) return true;
      digits[i] = 0;
    }
    return false;
  }
  std::vector<int> sizes;
  std::vector<int> digits;
};

}  // namespace

GameTable::GameTable(std::vector<ActionSet> action_sets, std::vector<double> costs)
    : action_sets_(std::move(action_sets)), costs_(std::move(costs)) {
  validate_action_sets(action_sets_);
  num_joint_ = 1;
  strides_.assign(action_sets_.size(), 1);
  for (int i = static_cast<int>(action_sets_.size()) - 1; i >= 0; --i) {
    strides_[i] = num_joint_;
    num_joint_ *= action_sets_[i].size();
  }
  if (costs_.size() != num_joint_ * action_sets_.size()) {
    throw ValidationError("game: cost table has " + std::to_string(costs_.size()) +
                          " entries, expected " +
                          std::to_string(num_joint_ * action_sets_.size()));
  }
  for (double c : costs_) {
    if (!std::isfinite(c) || c < 0.0) {
      throw ValidationError("game: costs must be finite and >= 0");
    }
  }
}

std::size_t GameTable::index_of(const std::vector<int>& action_positions) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < strides_.size(); ++i) {
    idx += strides_[i] * static_cast<std::size_t>(action_positions[i]);
  }
  return idx;
}

std::vector<int> GameTable::positions_of(std::size_t joint_index) const {
  std::vector<int> out(action_sets_.size());
  for (std::size_t i = 0; i < action_sets_.size(); ++i) {
    out[i] = static_cast<int>(joint_index / strides_[i] % action_sets_[i].size());
  }
  return out;
}

int GameTable::position_of_action(int player, int action_value) const {
  const auto& set = action_sets_[player];
  const auto it = std::find(set.begin(), set.end(), action_value);
  if (it == set.end()) {
    throw ValidationError("game: action " + std::to_string(action_value) +
                          " not in player " + std::to_string(player) + "'s set");
  }
  return static_cast<int>(it - set.begin());
}

double GameTable::cost_spread() const {
  const auto [lo, hi] = std::minmax_element(costs_.begin(), costs_.end());
  return *hi - *lo;
}

GameTable dsm_game_build(const std::vector<LoadProfile>& profiles,
                         const TargetProfile& target, const ShiftParams& params,
                         const std::vector<ActionSet>& action_sets,
                         std::size_t max_joint_actions) {
  validate_action_sets(action_sets);
  if (action_sets.size() != profiles.size()) {
    throw ValidationError("dsm_game_build: one action set per customer required");
  }
  const int horizon = static_cast<int>(target.target.size());
  for (const auto& set : action_sets) {
    for (int a : set) {
      if (a < 1 || a > horizon) {
        throw ValidationError("dsm_game_build: action " + std::to_string(a) +
                              " outside 1.." + std::to_string(horizon));
      }
    }
  }
  long double exact = 1.0L;
  for (const auto& set : action_sets) exact *= static_cast<long double>(set.size());
  if (exact > static_cast<long double>(max_joint_actions)) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.0Lf", exact);
    throw ValidationError("dsm_game_build: joint action space of " + std::string(buf) +
                          " entries exceeds the cap of " +
                          std::to_string(max_joint_actions));
  }
  const std::size_t product = static_cast<std::size_t>(exact);

  const int n = static_cast<int>(profiles.size());
  std::vector<double> costs(product * n);
  JointOdometer odo(action_sets);
  JointAction joint{std::vector<int>(n)};
  std::size_t idx = 0;
  do {
    for (int i = 0; i < n; ++i) joint.start_hour[i] = action_sets[i][odo.digits[i]];
    const DsmSchedule sched = shift_schedule(profiles, target, params, joint);
    const std::vector<double> bills = bill_all(sched, params.price_scale);
    std::copy(bills.begin(), bills.end(), costs.begin() + idx * n);
    ++idx;
  } while (odo.advance());

  return GameTable(action_sets, std::move(costs));
}

double prelec_weight(double sigma, double alpha) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) {
    throw ValidationError("prelec_weight: probability outside [0,1]");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("prelec_weight: alpha outside (0,1]");
  }
  if (alpha == 1.0) return sigma;  // identity, kept exact
  if (sigma == 0.0) return 0.0;
  if (sigma == 1.0) return 1.0;
  return std::exp(-std::pow(-std::log(sigma), alpha));
}

MixedStrategyProfile::MixedStrategyProfile(std::vector<std::vector<double>> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("profile: at least one player required");
  for (const auto& p : probs_) {
    if (p.empty()) throw ValidationError("profile: empty strategy vector");
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("profile: probabilities must lie in [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("profile: probabilities sum to " + std::to_string(sum) +
                            ", expected 1");
    }
  }
}

MixedStrategyProfile MixedStrategyProfile::uniform(const GameTable& game) {
  std::vector<std::vector<double>> probs(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    const std::size_t k = game.actions_of(i).size();
    probs[i].assign(k, 1.0 / static_cast<double>(k));
  }
  return MixedStrategyProfile(std::move(probs));
}

namespace {

void check_profile_shape(const MixedStrategyProfile& profile, const GameTable& game) {
  if (profile.num_players() != game.num_players()) {
    throw ValidationError("profile: player count differs from the game's");
  }
  for (int i = 0; i < game.num_players(); ++i) {
    if (profile.of(i).size() != game.actions_of(i).size()) {
      throw ValidationError("profile: strategy length differs from player " +
                            std::to_string(i) + "'s action set");
    }
  }
}

void check_weights_shape(const WeightingSpec& weights, const GameTable& game) {
  if (static_cast<int>(weights.alpha.size()) != game.num_players()) {
    throw ValidationError("weights: one alpha per player required");
  }
  for (double a : weights.alpha) {
    if (!(a > 0.0 && a <= 1.0)) throw ValidationError("weights: alpha outside (0,1]");
  }
}

// Opponent probabilities as seen by `observer`: objective for EUT, passed
// through the observer's Prelec weight for PT. The observer's own row is the
// objective probability either way.
std::vector<std::vector<double>> observed_probs(const MixedStrategyProfile& profile,
                                                const EvalMode& mode, int observer) {
  std::vector<std::vector<double>> out = profile.probs();
  if (mode.weighted) {
    const double alpha = mode.weights.alpha[observer];
    for (int l = 0; l < static_cast<int>(out.size()); ++l) {
      if (l == observer) continue;
      for (double& v : out[l]) v = prelec_weight(v, alpha);
    }
  }
  return out;
}

}  // namespace

double eut_cost(int player, const MixedStrategyProfile& profile, const GameTable& game) {
  check_profile_shape(profile, game);
  const int n = game.num_players();
  JointOdometer odo(game.action_sets());
  double out = 0.0;
  std::size_t idx = 0;
  do {
    double w = 1.0;
    for (int l = 0; l < n; ++l) w *= profile.of(l)[odo.digits[l]];
    out += w * game.cost(idx, player);
    ++idx;
  } while (odo.advance());
  return out;
}

double pt_cost(int player, const MixedStrategyProfile& profile, const GameTable& game,
               const WeightingSpec& weights) {
  check_profile_shape(profile, game);
  check_weights_shape(weights, game);
  const int n = game.num_players();
  const auto observed = observed_probs(profile, EvalMode::pt(weights), player);
  JointOdometer odo(game.action_sets());
  double out = 0.0;
  std::size_t idx = 0;
  do {
    double w = profile.of(player)[odo.digits[player]];
    for (int l = 0; l < n; ++l) {
      if (l != player) w *= observed[l][odo.digits[l]];
    }
    out += w * game.cost(idx, player);
    ++idx;
  } while (odo.advance());
  return out;
}

std::vector<double> cond_costs(int player, const MixedStrategyProfile& profile,
                               const GameTable& game, const EvalMode& mode) {
  check_profile_shape(profile, game);
  if (mode.weighted) check_weights_shape(mode.weights, game);
  const int n = game.num_players();
  const auto observed = observed_probs(profile, mode, player);
  std::vector<double> out(game.actions_of(player).size(), 0.0);
  JointOdometer odo(game.action_sets());
  std::size_t idx = 0;
  do {
    double w = 1.0;
    for (int l = 0; l < n; ++l) {
      if (l != player) w *= observed[l][odo.digits[l]];
    }
    out[odo.digits[player]] += w * game.cost(idx, player);
    ++idx;
  } while (odo.advance());
  return out;
}

double cond_cost(int player, int action_value, const MixedStrategyProfile& profile,
                 const GameTable& game, const EvalMode& mode) {
  const int pos = game.position_of_action(player, action_value);
  return cond_costs(player, profile, game, mode)[pos];
}

EpsilonReport epsilon_of_profile(const MixedStrategyProfile& profile,
                                 const GameTable& game, const EvalMode& mode) {
  EpsilonReport report;
  report.per_player.resize(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    const double mixed = mode.weighted ? pt_cost(i, profile, game, mode.weights)
                                       : eut_cost(i, profile, game);
    const std::vector<double> conds = cond_costs(i, profile, game, mode);
    double best = conds[0];
    for (double c : conds) best = std::min(best, c);
    // Nonnegative up to summation round-off between the two evaluation routes.
    report.per_player[i] = std::max(0.0, mixed - best);
    report.max_eps = std::max(report.max_eps, report.per_player[i]);
  }
  return report;
}

}  // namespace dsm
