#include "dsmgame/solver.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

#include "../support/generators.hpp"

using namespace dsm;

namespace {

GameTable matching_pennies() {
  std::vector<ActionSet> sets = {{1, 2}, {1, 2}};
  std::vector<double> costs;
  for (int a : {1, 2}) {
    for (int b : {1, 2}) {
      costs.push_back(a == b ? 0.0 : 1.0);
      costs.push_back(a == b ? 1.0 : 0.0);
    }
  }
  return GameTable(sets, costs);
}

// Both players strictly prefer their first action no matter what.
GameTable dominant_game() {
  std::vector<ActionSet> sets = {{1, 2}, {1, 2}};
  std::vector<double> costs;
  for (int a : {1, 2}) {
    for (int b : {1, 2}) {
      costs.push_back(a == 1 ? 1.0 : 6.0);
      costs.push_back(b == 1 ? 1.0 : 6.0);
    }
  }
  return GameTable(sets, costs);
}

bool same_profile(const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& b) {
  return a == b;  // bitwise
}

}  // namespace

TEST_CASE("best response: dominance, pure opponents and tie-breaking") {
  const GameTable dom = dominant_game();
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MixedStrategyProfile p(dsm_test::random_profile(rng, dom));
    CHECK(best_response_index(0, p, dom, EvalMode::eut()) == 0);
    CHECK(best_response(1, p, dom, EvalMode::eut()) == std::vector<double>{1.0, 0.0});
  }

  const GameTable mp = matching_pennies();
  // opponent committed to action 2: player 0 matches, player 1 avoids
  const MixedStrategyProfile committed({{0.5, 0.5}, {0.0, 1.0}});
  CHECK(best_response_index(0, committed, mp, EvalMode::eut()) == 1);
  const MixedStrategyProfile committed0({{1.0, 0.0}, {0.5, 0.5}});
  CHECK(best_response_index(1, committed0, mp, EvalMode::eut()) == 1);

  // exact tie at the uniform point: the smaller action value wins
  CHECK(best_response_index(0, MixedStrategyProfile::uniform(mp), mp, EvalMode::eut()) == 0);
  CHECK(best_response_index(1, MixedStrategyProfile::uniform(mp), mp, EvalMode::eut()) == 0);
}

TEST_CASE("sfp_step arithmetic") {
  const MixedStrategyProfile p({{0.5, 0.5}});
  const MixedStrategyProfile stepped = sfp_step(p, {{1.0, 0.0}}, 1, 0.5);
  CHECK(stepped.of(0)[0] == 0.625);
  CHECK(stepped.of(0)[1] == 0.375);

  // a one-hot fixed point does not move, bit for bit
  const MixedStrategyProfile vertex({{0.0, 1.0}});
  CHECK(same_profile(sfp_step(vertex, {{0.0, 1.0}}, 3, 0.7).probs(), vertex.probs()));

  CHECK_THROWS_AS(sfp_step(p, {{1.0, 0.0}}, 0, 0.5), ValidationError);
  CHECK_THROWS_AS(sfp_step(p, {{1.0, 0.0, 0.0}}, 1, 0.5), ValidationError);
}

TEST_CASE("sfp_step stays on the simplex and respects the step bound") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const GameTable game = dsm_test::random_game(rng, 3, 4);
    MixedStrategyProfile p(dsm_test::random_profile(rng, game));
    for (long k = 1; k <= 500; ++k) {
      std::vector<std::vector<double>> one_hots(game.num_players());
      for (int i = 0; i < game.num_players(); ++i) {
        one_hots[i].assign(game.actions_of(i).size(), 0.0);
        one_hots[i][rng() % one_hots[i].size()] = 1.0;
      }
      const double lambda = 0.5;
      const MixedStrategyProfile next = sfp_step(p, one_hots, k, lambda);
      for (int i = 0; i < game.num_players(); ++i) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t j = 0; j < next.of(i).size(); ++j) {
          const double v = next.of(i)[j];
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          sum += v;
          const double d = next.of(i)[j] - p.of(i)[j];
          sq += d * d;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(std::sqrt(sq) <= lambda * std::sqrt(2.0) / (k + 1) * (1 + 1e-12));
      }
      p = next;
    }
  }
}

TEST_CASE("lambda=1 iterates equal the running average of best responses") {
  std::mt19937 rng(23);
  const std::vector<std::size_t> counts = {3, 2};
  std::vector<std::vector<double>> start = {{0.2, 0.3, 0.5}, {0.7, 0.3}};
  MixedStrategyProfile p{start};
  std::vector<std::vector<double>> sum = start;  // p1 + accumulated one-hots
  const long steps = 1000;
  for (long k = 1; k <= steps; ++k) {
    std::vector<std::vector<double>> one_hots(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      one_hots[i].assign(counts[i], 0.0);
      const std::size_t pick = rng() % counts[i];
      one_hots[i][pick] = 1.0;
      sum[i][pick] += 1.0;
    }
    p = sfp_step(p, one_hots, k, 1.0);
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = 0; j < counts[i]; ++j) {
      CHECK(p.of(i)[j] == doctest::Approx(sum[i][j] / (steps + 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("belief gap bound") {
  CHECK(belief_gap_bound(1, 0.5) == doctest::Approx(0.3535533905932738).epsilon(1e-15));
  CHECK(belief_gap_bound(1, 1.0) == 0.0);
  CHECK(belief_gap_bound(10, 0.999) ==
        doctest::Approx(0.001 * std::sqrt(2.0) / 11).epsilon(1e-9));
  double prev = belief_gap_bound(1, 0.3);
  for (long k = 2; k < 50; ++k) {
    const double cur = belief_gap_bound(k, 0.3);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK_THROWS_AS(belief_gap_bound(0, 0.5), ValidationError);
}

TEST_CASE("solve certifies the matching pennies equilibrium from uniform") {
  const GameTable mp = matching_pennies();
  SolverConfig config;
  config.lambda = 0.5;
  config.eps_stop = 0.01;
  config.max_iter = 50000;
  const SolveResult result = solve(mp, config);
  CHECK(result.converged);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(result.profile.of(i)[0] - 0.5) <= 0.05);
    CHECK(std::abs(result.profile.of(i)[1] - 0.5) <= 0.05);
  }
  CHECK(result.eps.max_eps <= 0.01 * result.cost_spread);
}

TEST_CASE("solve reaches the equilibrium from a skewed start too") {
  const GameTable mp = matching_pennies();
  SolverConfig config;
  config.lambda = 0.5;
  config.eps_stop = 0.01;
  config.max_iter = 50000;
  config.init = ExplicitInit{{{0.9, 0.1}, {0.2, 0.8}}};
  const SolveResult result = solve(mp, config);
  CHECK(result.converged);
  CHECK(result.iterations > 0);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(result.profile.of(i)[0] - 0.5) <= 0.05);
  CHECK(result.trace.gap_bound_violations == 0);
  CHECK(result.trace.step_norm_violations == 0);
  CHECK(result.trace.max_step_ratio <= 1.0 + 1e-12);

  // the certified epsilon is reproducible from the returned profile
  const EpsilonReport again = epsilon_of_profile(result.profile, mp, EvalMode::eut());
  CHECK(again.max_eps == result.eps.max_eps);
  CHECK(again.per_player == result.eps.per_player);

  // iteration labels in the trace are strictly increasing from k=1
  CHECK(result.trace.snapshot_iterations.front() == 1);
  for (std::size_t s = 1; s < result.trace.snapshot_iterations.size(); ++s) {
    CHECK(result.trace.snapshot_iterations[s] > result.trace.snapshot_iterations[s - 1]);
  }
}

TEST_CASE("solve concentrates on a dominant action") {
  SolverConfig config;
  config.lambda = 0.9;
  config.eps_stop = 1e-4;
  config.max_iter = 100000;
  config.init = ExplicitInit{{{0.3, 0.7}, {0.5, 0.5}}};
  const SolveResult result = solve(dominant_game(), config);
  CHECK(result.profile.of(0)[0] >= 0.99);
  CHECK(result.profile.of(1)[0] >= 0.99);
}

TEST_CASE("solve reports non-convergence instead of throwing") {
  const GameTable mp = matching_pennies();
  SolverConfig config;
  config.eps_stop = 1e-9;
  config.max_iter = 40;
  config.check_every = 1000;  // never certified mid-run
  config.init = ExplicitInit{{{0.9, 0.1}, {0.2, 0.8}}};
  const SolveResult result = solve(mp, config);
  CHECK_FALSE(result.converged);
  CHECK(result.iterations == 40);
  CHECK(result.eps.max_eps > 0.0);
  // final profile and epsilon still certified against each other
  const EpsilonReport again = epsilon_of_profile(result.profile, mp, EvalMode::eut());
  CHECK(again.max_eps == result.eps.max_eps);
}

TEST_CASE("identical configuration gives a bit-identical run") {
  const GameTable mp = matching_pennies();
  SolverConfig config;
  config.lambda = 0.7;
  config.eps_stop = 1e-6;
  config.max_iter = 3000;
  config.init = RandomSimplexInit{991};
  const SolveResult a = solve(mp, config);
  const SolveResult b = solve(mp, config);
  CHECK(same_profile(a.profile.probs(), b.profile.probs()));
  CHECK(a.trace.best_responses == b.trace.best_responses);
  CHECK(a.trace.snapshots == b.trace.snapshots);
  CHECK(a.eps.max_eps == b.eps.max_eps);
}

TEST_CASE("PT with alpha=1 walks exactly the EUT path") {
  std::mt19937 rng(61);
  const GameTable game = dsm_test::random_game(rng, 3, 3);
  SolverConfig config;
  config.max_iter = 500;
  config.eps_stop = 1e-9;
  config.init = RandomSimplexInit{7};
  SolverConfig pt_config = config;
  pt_config.mode = EvalMode::pt(WeightingSpec{std::vector<double>(game.num_players(), 1.0)});
  const SolveResult eut = solve(game, config);
  const SolveResult pt = solve(game, pt_config);
  CHECK(eut.trace.best_responses == pt.trace.best_responses);
  CHECK(same_profile(eut.profile.probs(), pt.profile.probs()));
}

TEST_CASE("solve validates its configuration") {
  const GameTable mp = matching_pennies();
  SolverConfig config;
  config.lambda = 0.0;
  CHECK_THROWS_AS(solve(mp, config), ValidationError);
  config = SolverConfig{};
  config.eps_stop = 0.0;
  CHECK_THROWS_AS(solve(mp, config), ValidationError);
  config = SolverConfig{};
  config.mode = EvalMode::pt(WeightingSpec{{0.5}});  // wrong player count
  CHECK_THROWS_AS(solve(mp, config), ValidationError);
}

TEST_CASE("convergence rate: degenerate, geometric and solver traces") {
  // constant trace: every denominator vanishes, estimate flagged unavailable
  SolverTrace constant;
  for (long k = 1; k <= 40; ++k) {
    constant.snapshot_iterations.push_back(k);
    constant.snapshots.push_back({{0.5, 0.5}});
  }
  CHECK_FALSE(convergence_rate(constant).available);

  // too few snapshots
  SolverTrace tiny;
  for (long k = 1; k <= 5; ++k) {
    tiny.snapshot_iterations.push_back(k);
    tiny.snapshots.push_back({{0.5, 0.5}});
  }
  CHECK_FALSE(convergence_rate(tiny).available);

  // injected geometric decay p(k) = p* + c * 2^-k contracts at 1/2
  SolverTrace geometric;
  for (long k = 1; k <= 60; ++k) {
    geometric.snapshot_iterations.push_back(k);
    const double off = std::ldexp(0.4, static_cast<int>(-k));
    geometric.snapshots.push_back({{0.5 + off, 0.5 - off}});
  }
  const RateEstimate geo = convergence_rate(geometric);
  CHECK(geo.available);
  CHECK(geo.value == doctest::Approx(0.5).epsilon(0.05));
  CHECK(geo.samples >= 10);

  // a real matching-pennies run converges sublinearly: rate close to 1
  SolverConfig config;
  config.lambda = 0.5;
  config.eps_stop = 1e-9;
  config.max_iter = 4000;
  config.check_every = 100000;
  config.init = ExplicitInit{{{0.9, 0.1}, {0.2, 0.8}}};
  const SolveResult mp_run = solve(matching_pennies(), config);
  const RateEstimate rate = convergence_rate(mp_run.trace);
  CHECK(rate.available);
  CHECK(rate.value > 0.9);
  CHECK(rate.value <= 1.001);
}

TEST_CASE("cycle detection: constant, alternating and fictitious-play traces") {
  // constant best responses: period 1
  SolverTrace constant;
  for (int k = 0; k < 300; ++k) constant.best_responses.push_back({0, 0});
  CHECK(cycle_detect(constant, 256) == 1);

  // strict two-phase alternation
  SolverTrace alternating;
  for (int k = 0; k < 300; ++k) alternating.best_responses.push_back({k % 2, 0});
  CHECK(cycle_detect(alternating, 256) == 2);

  // shorter than the window: no verdict
  SolverTrace shorty;
  for (int k = 0; k < 100; ++k) shorty.best_responses.push_back({k % 2, 0});
  CHECK_FALSE(cycle_detect(shorty, 256).has_value());

  // classical fictitious play on matching pennies circles through the four
  // best-response corners with growing dwell times
  SolverConfig config;
  config.lambda = 1.0;
  config.eps_stop = 1e-15;
  config.max_iter = 2000;
  config.check_every = 1000000;
  config.init = ExplicitInit{{{0.7, 0.3}, {0.4, 0.6}}};
  const SolveResult fp = solve(matching_pennies(), config);
  const auto period = cycle_detect(fp.trace, 1200);
  REQUIRE(period.has_value());
  CHECK(*period >= 2);
  CHECK(*period % 2 == 0);
  CHECK(*period <= 4);

  // inertia below 1 settles into a constant best response on a dominant game
  SolverConfig dom_config;
  dom_config.lambda = 0.5;
  dom_config.eps_stop = 1e-15;
  dom_config.max_iter = 600;
  dom_config.check_every = 1000000;
  dom_config.init = ExplicitInit{{{0.3, 0.7}, {0.5, 0.5}}};
  const SolveResult dom = solve(dominant_game(), dom_config);
  const auto dom_period = cycle_detect(dom.trace, 512);
  CHECK(dom_period == 1);
}

TEST_CASE("random simplex initialization is a seeded uniform simplex draw") {
  const auto a = random_simplex_profile({4, 2, 3}, 99);
  const auto b = random_simplex_profile({4, 2, 3}, 99);
  const auto c = random_simplex_profile({4, 2, 3}, 100);
  CHECK(a == b);
  CHECK(a != c);
  for (const auto& row : a) {
    double sum = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  // feeds the profile validator without complaint
  CHECK_NOTHROW(MixedStrategyProfile{a});
}
