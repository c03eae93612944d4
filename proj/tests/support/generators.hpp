#pragma once

// Seeded random instances shared by the unit and acceptance suites.

#include <random>
#include <vector>

#include "dsmgame/game.hpp"
#include "dsmgame/load_shift.hpp"

namespace dsm_test {

struct DsmInstance {
  std::vector<dsm::LoadProfile> profiles;
  dsm::TargetProfile target;
  dsm::ShiftParams params;
  std::vector<dsm::ActionSet> action_sets;
};

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random load-shifting instance with adversarial targets: factors near zero
// push the suggested per-participant average negative.
inline DsmInstance random_dsm_instance(std::mt19937& rng, int max_customers = 6) {
  DsmInstance inst;
  const int n = uniform_int(rng, 1, max_customers);
  const int horizon = rng() % 2 == 0 ? 3 : 24;

  for (int i = 0; i < n; ++i) {
    dsm::LoadProfile p;
    p.customer_id = "c" + std::to_string(i + 1);
    p.demand.resize(horizon);
    for (double& v : p.demand) {
      v = uniform(rng, 0.0, 10.0);
      if (uniform(rng, 0.0, 1.0) < 0.05) v = 0.0;  // idle hours happen
    }
    inst.profiles.push_back(std::move(p));
    inst.params.gamma.push_back(uniform(rng, 0.05, 1.0));
  }
  inst.params.price_scale = uniform(rng, 0.5, 2.0);
  inst.params.sentinel_action = horizon;

  std::vector<double> historical(horizon, 0.0);
  for (const auto& p : inst.profiles) {
    for (int h = 0; h < horizon; ++h) historical[h] += p.demand[h];
  }
  std::vector<std::pair<int, double>> multipliers;
  for (int h = 1; h <= horizon; ++h) {
    if (uniform(rng, 0.0, 1.0) < 0.4) {
      multipliers.emplace_back(h, uniform(rng, 0.0, 1.2));
    }
  }
  inst.target = dsm::build_target(historical, multipliers);

  for (int i = 0; i < n; ++i) {
    dsm::ActionSet set;
    for (int a = 1; a <= horizon; ++a) {
      if (uniform(rng, 0.0, 1.0) < 3.0 / horizon) set.push_back(a);
    }
    if (set.empty() || set.back() != horizon) set.push_back(horizon);  // keep the opt-out
    while (set.size() > 4) set.erase(set.begin() + uniform_int(rng, 0, static_cast<int>(set.size()) - 2));
    inst.action_sets.push_back(std::move(set));
  }
  return inst;
}

// Every joint action of an instance, as explicit start-hour vectors.
inline std::vector<dsm::JointAction> all_joint_actions(const std::vector<dsm::ActionSet>& sets) {
  std::vector<dsm::JointAction> out;
  std::vector<int> digits(sets.size(), 0);
  while (true) {
    dsm::JointAction joint;
    for (std::size_t i = 0; i < sets.size(); ++i) joint.start_hour.push_back(sets[i][digits[i]]);
    out.push_back(std::move(joint));
    int i = static_cast<int>(sets.size()) - 1;
    for (; i >= 0; --i) {
      if (++digits[i] < static_cast<int>(sets[i].size())) break;
      digits[i] = 0;
    }
    if (i < 0) return out;
  }
}

// Random cost game over small action sets, costs in [0, cost_hi].
inline dsm::GameTable random_game(std::mt19937& rng, int max_players = 4, int max_actions = 4,
                                  double cost_hi = 10.0) {
  const int n = uniform_int(rng, 1, max_players);
  std::vector<dsm::ActionSet> sets(n);
  std::size_t joint = 1;
  for (auto& set : sets) {
    const int k = uniform_int(rng, 1, max_actions);
    for (int a = 1; a <= k; ++a) set.push_back(a);
    joint *= k;
  }
  std::vector<double> costs(joint * n);
  for (double& c : costs) c = uniform(rng, 0.0, cost_hi);
  return dsm::GameTable(sets, std::move(costs));
}

inline std::vector<std::vector<double>> random_profile(std::mt19937& rng,
                                                       const dsm::GameTable& game) {
  std::vector<std::vector<double>> probs(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    probs[i].resize(game.actions_of(i).size());
    double sum = 0.0;
    for (double& v : probs[i]) {
      v = -std::log(1.0 - uniform(rng, 0.0, 1.0));
      sum += v;
    }
    for (double& v : probs[i]) v /= sum;
    double drift = 1.0;
    for (double v : probs[i]) drift -= v;
    probs[i].back() += drift;
  }
  return probs;
}

}  // namespace dsm_test
