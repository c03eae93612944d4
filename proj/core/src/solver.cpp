#include "dsmgame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace dsm {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
// Slack for comparing computed norms against the analytic guards; they can
// meet the bound exactly, so only genuine excess counts as a violation.
constexpr double kGuardSlack = 1.0 + 1e-12;

int argmin_smallest(const std::vector<double>& values) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(values.size()); ++j) {
    if (values[j] < values[best]) best = j;
  }
  return best;
}

double canonical_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

int best_response_index(int player, const MixedStrategyProfile& profile,
                        const GameTable& game, const EvalMode& mode) {
  return argmin_smallest(cond_costs(player, profile, game, mode));
}

std::vector<double> best_response(int player, const MixedStrategyProfile& profile,
                                  const GameTable& game, const EvalMode& mode) {
  std::vector<double> out(game.actions_of(player).size(), 0.0);
  out[best_response_index(player, profile, game, mode)] = 1.0;
  return out;
}

MixedStrategyProfile sfp_step(const MixedStrategyProfile& profile,
                              const std::vector<std::vector<double>>& one_hots, long k,
                              double lambda) {
  if (k < 1) throw ValidationError("sfp_step: iteration index starts at 1");
  if (one_hots.size() != profile.probs().size()) {
    throw ValidationError("sfp_step: one best response per player required");
  }
  const double step = lambda / static_cast<double>(k + 1);
  std::vector<std::vector<double>> next = profile.probs();
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (one_hots[i].size() != next[i].size()) {
      throw ValidationError("sfp_step: best-response length mismatch");
    }
    for (std::size_t j = 0; j < next[i].size(); ++j) {
      // The update is a convex combination, so the iterate stays on the
      // simplex; the displacement form also keeps fixed points bit-exact.
      next[i][j] += step * (one_hots[i][j] - next[i][j]);
    }
  }
  return MixedStrategyProfile(std::move(next));
}

double belief_gap_bound(long k, double lambda) {
  if (k < 1) throw ValidationError("belief_gap_bound: iteration index starts at 1");
  return (1.0 - lambda) * kSqrt2 / static_cast<double>(k + 1);
}

std::vector<std::vector<double>> random_simplex_profile(
    const std::vector<std::size_t>& action_counts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(action_counts.size());
  for (std::size_t i = 0; i < action_counts.size(); ++i) {
    out[i].resize(action_counts[i]);
    double sum = 0.0;
    for (double& v : out[i]) {
      // Exponential spacings give a uniform draw on the simplex.
      v = -std::log1p(-canonical_unit(rng));
      sum += v;
    }
    if (sum <= 0.0) {
      std::fill(out[i].begin(), out[i].end(), 1.0 / action_counts[i]);
      continue;
    }
    for (double& v : out[i]) v /= sum;
    // Nudge the largest entry so the row sums to 1 exactly.
    double drift = 1.0;
    for (double v : out[i]) drift -= v;
    *std::max_element(out[i].begin(), out[i].end()) += drift;
  }
  return out;
}

namespace {

MixedStrategyProfile initial_profile(const GameTable& game, const InitSpec& init) {
  if (std::holds_alternative<UniformInit>(init)) {
    return MixedStrategyProfile::uniform(game);
  }
  if (const auto* explicit_init = std::get_if<ExplicitInit>(&init)) {
    return MixedStrategyProfile(explicit_init->probs);
  }
  const auto& random_init = std::get<RandomSimplexInit>(init);
  std::vector<std::size_t> counts(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) counts[i] = game.actions_of(i).size();
  return MixedStrategyProfile(random_simplex_profile(counts, random_init.seed));
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    sq += d * d;
  }
  return std::sqrt(sq);
}

}  // namespace

SolveResult solve(const GameTable& game, const SolverConfig& config) {
  if (!(config.lambda > 0.0 && config.lambda <= 1.0)) {
    throw ValidationError("solve: lambda outside (0,1]");
  }
  if (config.max_iter < 1) throw ValidationError("solve: max_iter must be >= 1");
  if (!(config.eps_stop > 0.0)) throw ValidationError("solve: eps_stop must be > 0");
  if (config.check_every < 1 || config.snapshot_every < 1) {
    throw ValidationError("solve: check_every and snapshot_every must be >= 1");
  }
  if (config.mode.weighted &&
      static_cast<int>(config.mode.weights.alpha.size()) != game.num_players()) {
    throw ValidationError("solve: one alpha per player required in PT mode");
  }

  const int n = game.num_players();
  const double spread = game.cost_spread();
  const double threshold = config.eps_stop * spread;

  MixedStrategyProfile profile = initial_profile(game, config.init);
  SolveResult result{profile, {}, false, 0, threshold, spread, {}};
  SolverTrace& trace = result.trace;

  const auto record_snapshot = [&](long k, const MixedStrategyProfile& p) {
    if (!trace.snapshot_iterations.empty() && trace.snapshot_iterations.back() == k) return;
    trace.snapshot_iterations.push_back(k);
    trace.snapshots.push_back(p.probs());
  };

  long k = 1;
  for (; k <= config.max_iter; ++k) {
    if ((k - 1) % config.snapshot_every == 0) record_snapshot(k, profile);
    if ((k - 1) % config.check_every == 0) {
      EpsilonReport report = epsilon_of_profile(profile, game, config.mode);
      trace.eps_checks.push_back({k, report.per_player, report.max_eps});
      if (report.max_eps <= threshold) {
        record_snapshot(k, profile);
        result.profile = profile;
        result.eps = std::move(report);
        result.converged = true;
        result.iterations = k - 1;
        return result;
      }
    }

    std::vector<std::vector<double>> one_hots(n);
    std::vector<int> choices(n);
    for (int i = 0; i < n; ++i) {
      choices[i] = best_response_index(i, profile, game, config.mode);
      one_hots[i].assign(game.actions_of(i).size(), 0.0);
      one_hots[i][choices[i]] = 1.0;
    }
    trace.best_responses.push_back(std::move(choices));

    MixedStrategyProfile next = sfp_step(profile, one_hots, k, config.lambda);

    // Theorem guards: the deviation from classical fictitious play and the
    // step norm are both capped by sqrt(2)-scaled multiples of 1/(k+1).
    const double kp1 = static_cast<double>(k + 1);
    for (int i = 0; i < n; ++i) {
      const double dist = l2_distance(profile.of(i), one_hots[i]);
      if (config.lambda < 1.0) {
        const double gap = (1.0 - config.lambda) / kp1 * dist;
        const double bound = belief_gap_bound(k, config.lambda);
        trace.max_gap_ratio = std::max(trace.max_gap_ratio, gap / bound);
        if (gap > bound * kGuardSlack) ++trace.gap_bound_violations;
      }
      const double step_norm = l2_distance(next.of(i), profile.of(i));
      const double step_bound = config.lambda * kSqrt2 / kp1;
      trace.max_step_ratio = std::max(trace.max_step_ratio, step_norm / step_bound);
      if (step_norm > step_bound * kGuardSlack) ++trace.step_norm_violations;
    }

    profile = std::move(next);
  }

  record_snapshot(config.max_iter + 1, profile);
  EpsilonReport report = epsilon_of_profile(profile, game, config.mode);
  trace.eps_checks.push_back({config.max_iter + 1, report.per_player, report.max_eps});
  result.profile = profile;
  result.converged = report.max_eps <= threshold;
  result.eps = std::move(report);
  result.iterations = config.max_iter;
  return result;
}

RateEstimate convergence_rate(const SolverTrace& trace) {
  RateEstimate est;
  const std::size_t count = trace.snapshots.size();
  if (count < 10) return est;

  const std::vector<std::vector<double>>& final_profile = trace.snapshots.back();
  const long final_iter = trace.snapshot_iterations.back();
  // Late window: [50%, 90%] of the run, away from both the transient and the
  // final iterate (where the denominators collapse).
  const long lo = static_cast<long>(0.5 * static_cast<double>(final_iter));
  const long hi = static_cast<long>(0.9 * static_cast<double>(final_iter));

  double sum = 0.0;
  long used = 0;
  long first = 0, last = 0;
  for (std::size_t s = 0; s + 1 < count; ++s) {
    const long k = trace.snapshot_iterations[s];
    if (k < lo || k > hi) continue;
    if (trace.snapshot_iterations[s + 1] != k + 1) continue;  // need consecutive iterates
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < final_profile.size(); ++i) {
      const double dn = l2_distance(trace.snapshots[s + 1][i], final_profile[i]);
      const double dd = l2_distance(trace.snapshots[s][i], final_profile[i]);
      num += dn * dn;
      den += dd * dd;
    }
    if (den <= 0.0) continue;  // already at the fixed point
    sum += std::sqrt(num) / std::sqrt(den);
    if (used == 0) first = k;
    last = k;
    ++used;
  }
  if (used == 0) return est;
  est.available = true;
  est.value = sum / static_cast<double>(used);
  est.window_first = first;
  est.window_last = last;
  est.samples = used;
  return est;
}

std::optional<int> cycle_detect(const SolverTrace& trace, int window) {
  const auto& seq = trace.best_responses;
  if (window < 2 || static_cast<int>(seq.size()) < window) return std::nullopt;

  // Collapse consecutive duplicates over the trailing window; fictitious play
  // revisits the same best response for longer and longer stretches, so only
  // the order of distinct responses matters.
  std::vector<const std::vector<int>*> runs;
  for (std::size_t t = seq.size() - static_cast<std::size_t>(window); t < seq.size(); ++t) {
    if (runs.empty() || *runs.back() != seq[t]) runs.push_back(&seq[t]);
  }
  const int m = static_cast<int>(runs.size());
  if (m == 1) return 1;  // constant best response over the whole window

  for (int period = 2; 2 * period <= m; ++period) {
    bool ok = true;
    for (int j = period; j < m; ++j) {
      if (*runs[j] != *runs[j - period]) {
        ok = false;
        break;
      }
    }
    if (ok) return period;
  }
  return std::nullopt;
}

}  // namespace dsm
