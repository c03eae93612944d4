#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "dsmgame/game.hpp"
#include "dsmgame/solver.hpp"

namespace {

using namespace dsm;

// Six customers, four start hours each: the paper-scale 4096-entry game.
struct Fixture {
  std::vector<LoadProfile> profiles;
  TargetProfile target;
  ShiftParams params{std::vector<double>(6, 0.6), 1.0, 24};
  std::vector<ActionSet> sets;

  Fixture() {
    std::vector<double> historical(24, 0.0);
    for (int i = 0; i < 6; ++i) {
      std::vector<double> demand(24);
      for (int h = 1; h <= 24; ++h) {
        demand[h - 1] = (8.0 + i) * (1.0 + 0.4 * std::exp(-0.5 * std::pow((h - 19.0) / 2.0, 2)));
        historical[h - 1] += demand[h - 1];
      }
      profiles.push_back({"c" + std::to_string(i + 1), demand});
      sets.push_back({18, 19, 20, 24});
    }
    target = build_target(historical, {{18, 0.86}, {19, 0.86}, {20, 0.86}});
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

const GameTable& paper_game() {
  static GameTable game = dsm_game_build(fixture().profiles, fixture().target,
                                         fixture().params, fixture().sets);
  return game;
}

void BM_ShiftSchedule(benchmark::State& state) {
  const Fixture& f = fixture();
  const JointAction joint{{18, 19, 20, 24, 18, 19}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(shift_schedule(f.profiles, f.target, f.params, joint));
  }
}
BENCHMARK(BM_ShiftSchedule);

void BM_GameBuild(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsm_game_build(f.profiles, f.target, f.params, f.sets));
  }
}
BENCHMARK(BM_GameBuild)->Unit(benchmark::kMillisecond);

void BM_EutCost(benchmark::State& state) {
  const GameTable& game = paper_game();
  const MixedStrategyProfile p = MixedStrategyProfile::uniform(game);
  for (auto _ : state) {
    for (int i = 0; i < game.num_players(); ++i) {
      benchmark::DoNotOptimize(eut_cost(i, p, game));
    }
  }
}
BENCHMARK(BM_EutCost);

void BM_PtCost(benchmark::State& state) {
  const GameTable& game = paper_game();
  const MixedStrategyProfile p = MixedStrategyProfile::uniform(game);
  const WeightingSpec weights{std::vector<double>(6, 0.7)};
  for (auto _ : state) {
    for (int i = 0; i < game.num_players(); ++i) {
      benchmark::DoNotOptimize(pt_cost(i, p, game, weights));
    }
  }
}
BENCHMARK(BM_PtCost);

void BM_EpsilonCertificate(benchmark::State& state) {
  const GameTable& game = paper_game();
  const MixedStrategyProfile p = MixedStrategyProfile::uniform(game);
  for (auto _ : state) {
    benchmark::DoNotOptimize(epsilon_of_profile(p, game, EvalMode::eut()));
  }
}
BENCHMARK(BM_EpsilonCertificate);

void BM_SolverIterations(benchmark::State& state) {
  const GameTable& game = paper_game();
  SolverConfig config;
  config.lambda = 0.9;
  config.max_iter = state.range(0);
  config.eps_stop = 1e-15;  // run the full budget
  config.check_every = 1000000;
  config.snapshot_every = 1000000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(game, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SolverIterations)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
