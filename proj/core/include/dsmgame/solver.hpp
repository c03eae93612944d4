#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "dsmgame/game.hpp"

namespace dsm {

struct UniformInit {};
struct ExplicitInit {
  std::vector<std::vector<double>> probs;
};
struct RandomSimplexInit {
  std::uint64_t seed = 0;
};
using InitSpec = std::variant<UniformInit, ExplicitInit, RandomSimplexInit>;

// Inertia-weighted fictitious play configuration. `lambda` in (0,1] is the
// inertia weight (1 recovers classical fictitious play and is only useful as
// a cycling diagnostic). `eps_stop` is relative to the game's cost spread.
struct SolverConfig {
  double lambda = 0.5;
  long max_iter = 100000;
  double eps_stop = 1e-3;
  long check_every = 50;
  long snapshot_every = 1;
  InitSpec init = UniformInit{};
  EvalMode mode = EvalMode::eut();
};

struct EpsCheck {
  long iteration = 0;
  std::vector<double> per_player;
  double max_eps = 0.0;
};

// Per-run record of the dynamics. Iteration indices start at k=1 (the
// initial profile). `best_responses[k-1]` holds the action position each
// player chose at iteration k; `snapshots` are sampled profiles.
struct SolverTrace {
  std::vector<std::vector<int>> best_responses;
  std::vector<long> snapshot_iterations;
  std::vector<std::vector<std::vector<double>>> snapshots;
  std::vector<EpsCheck> eps_checks;
  // Theorem-style per-iteration guards (see belief_gap_bound); counts of
  // iterations where a guard was exceeded beyond round-off.
  long gap_bound_violations = 0;
  long step_norm_violations = 0;
  double max_gap_ratio = 0.0;   // observed gap / bound, worst case
  double max_step_ratio = 0.0;  // observed step norm / bound, worst case
};

struct SolveResult {
  MixedStrategyProfile profile;
  EpsilonReport eps;
  bool converged = false;
  long iterations = 0;  // update steps actually taken
  double eps_threshold = 0.0;
  double cost_spread = 0.0;
  SolverTrace trace;
};

// One-hot vector over `player`'s actions marking the conditional-cost
// minimizer; ties go to the smallest action value.
std::vector<double> best_response(int player, const MixedStrategyProfile& profile,
                                  const GameTable& game, const EvalMode& mode);
int best_response_index(int player, const MixedStrategyProfile& profile,
                        const GameTable& game, const EvalMode& mode);

// p' = p + lambda/(k+1) * (v - p) for every player at once. `one_hots` must
// be one-hot per player; the result stays exactly on the simplex.
MixedStrategyProfile sfp_step(const MixedStrategyProfile& profile,
                              const std::vector<std::vector<double>>& one_hots, long k,
                              double lambda);

// Upper bound (1-lambda) * sqrt(2) / (k+1) on the per-iteration deviation of
// the inertia-weighted update from classical fictitious play.
double belief_gap_bound(long k, double lambda);

// Runs the dynamics until the certified epsilon falls below
// eps_stop * cost_spread at a check point or max_iter steps elapse. The
// returned epsilon is always recomputed on the returned profile.
SolveResult solve(const GameTable& game, const SolverConfig& config);

struct RateEstimate {
  bool available = false;
  double value = 0.0;
  long window_first = 0;  // iteration labels of the snapshot window used
  long window_last = 0;
  long samples = 0;
};

// Empirical convergence rate |p(k+1)-p*| / |p(k)-p*| averaged over a late
// window of consecutive snapshots, with p* the final iterate. Values close
// to 1 indicate sublinear convergence.
RateEstimate convergence_rate(const SolverTrace& trace);

// Looks for a repeating pattern in the best-response sequence over the
// trailing `window` iterations. Consecutive duplicates are collapsed first,
// so patterns with growing dwell times still register. Returns the length of
// the repeating pattern (1 = constant), or nullopt when the trace is shorter
// than the window or shows no repetition.
std::optional<int> cycle_detect(const SolverTrace& trace, int window = 256);

// Uniform sample from the product of simplices, one row per action count.
std::vector<std::vector<double>> random_simplex_profile(
    const std::vector<std::size_t>& action_counts, std::uint64_t seed);

}  // namespace dsm
