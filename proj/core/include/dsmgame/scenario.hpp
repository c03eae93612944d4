#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsmgame/game.hpp"
#include "dsmgame/solver.hpp"

namespace dsm {

// Where a customer's baseline demand comes from: inline values, a named CSV
// column, or a share of the CSV aggregate column.
struct DemandSourceSpec {
  enum class Kind { Values, Column, Share };
  Kind kind = Kind::Values;
  std::vector<double> values;
  std::string column;
  double share = 0.0;
};

struct CustomerSpec {
  std::string id;
  double gamma = 0.6;
  double alpha = 1.0;
  ActionSet actions;
  DemandSourceSpec demand;
};

struct TargetSpec {
  // Historical per-hour totals the target is built from; defaults to the
  // aggregate baseline demand of the ingested customers.
  std::optional<std::vector<double>> historical;
  std::vector<std::pair<int, double>> multipliers;  // (hour, factor)
};

// Solver knobs as written in the scenario file (the evaluation mode is added
// per run).
struct SolverSettings {
  double lambda = 0.5;
  long max_iter = 100000;
  double eps_stop = 1e-3;
  long check_every = 50;
  long snapshot_every = 1;
  InitSpec init = UniformInit{};
};

// A full experiment description, as documented in the README. All energy
// quantities are kWh, hours are 1-based.
struct Scenario {
  std::string name = "scenario";
  int horizon = 24;
  double price_scale = 1.0;
  std::optional<std::string> demand_csv;
  std::optional<std::string> aggregate_column;
  std::vector<CustomerSpec> customers;
  TargetSpec target;
  SolverSettings solver;
  std::vector<std::string> modes = {"eut", "pt"};
  std::string trace_customer;  // defaults to the first customer
  std::string base_dir;        // directory of the scenario file, for csv paths
};

Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& base_dir);
// Canonical JSON echo used for hashing and result provenance.
std::string scenario_canonical_json(const Scenario& scenario);

struct CsvCustomerColumn {
  std::string customer_id;
  std::string column;
};
struct CsvCustomerShare {
  std::string customer_id;
  double share = 0.0;
};
struct CsvIngestOptions {
  int horizon = 24;
  std::vector<CsvCustomerColumn> columns;
  std::optional<std::string> aggregate_column;
  std::vector<CsvCustomerShare> shares;  // must sum to 1 when present
};

// Reads a headered, comma-separated file with exactly `horizon` data rows in
// hour order. Returns one profile per requested column, then one per share of
// the aggregate column. Rejects missing columns, non-numeric cells, wrong row
// counts and negative demands.
std::vector<LoadProfile> ingest_csv(const std::string& path, const CsvIngestOptions& options);

// Everything materialized and validated for one run; both modes of a run
// share the same initial profile so differences are attributable to the
// weighting effect alone.
struct ResolvedScenario {
  Scenario scenario;
  std::vector<LoadProfile> profiles;
  TargetProfile target;
  ShiftParams params;
  std::vector<ActionSet> action_sets;
  WeightingSpec weights;
  std::vector<std::vector<double>> initial_profile;
  std::uint64_t seed = 0;
  int trace_customer_index = 0;
};

ResolvedScenario resolve_scenario(const Scenario& scenario,
                                  std::optional<std::uint64_t> seed_override = std::nullopt);

// Expected hourly load owned by customers not yet participating at `hour`,
// under objective probabilities: sum_i x_i^h * P(start_i > h or opt-out).
double expected_nonparticipating_load(const MixedStrategyProfile& profile,
                                      const std::vector<LoadProfile>& profiles,
                                      const std::vector<ActionSet>& action_sets,
                                      int sentinel, int hour);

struct ModeResult {
  std::string mode;  // "eut" or "pt"
  std::vector<std::vector<double>> profile;
  EpsilonReport eps;
  double eps_threshold = 0.0;
  double cost_spread = 0.0;
  bool converged = false;
  long iterations = 0;
  std::vector<double> nonparticipating;  // per hour
  RateEstimate rate;
  std::optional<int> cycle_period;
  long gap_bound_violations = 0;
  long step_norm_violations = 0;
  // Downsampled per-iteration strategy of the trace customer.
  std::vector<long> trace_iterations;
  std::vector<std::vector<double>> trace_probs;
};

struct RunResult {
  std::string scenario_name;
  std::string scenario_echo;  // canonical scenario JSON
  int horizon = 24;
  double price_scale = 1.0;
  int sentinel = 24;
  std::vector<std::string> customer_ids;
  std::vector<double> gammas;
  std::vector<double> alphas;
  std::vector<ActionSet> action_sets;
  std::vector<std::vector<double>> demand;
  std::vector<double> target;
  std::vector<double> actual_demand;
  std::vector<std::vector<double>> initial_profile;
  int trace_customer_index = 0;
  std::vector<ModeResult> modes;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;
};

// Builds the game table once, solves every requested mode from the shared
// initial profile and computes the reported metrics.
RunResult run_scenario(const ResolvedScenario& resolved);

// Writes strategies.csv, nonparticipating_load.csv, trace.csv and result.json
// into `out_dir` (created if needed). Only result.json is written when no
// mode was run.
std::vector<std::string> emit_results(const RunResult& result, const std::string& out_dir);

RunResult read_result_file(const std::string& path);
std::string result_to_json(const RunResult& result);

struct VerifyReport {
  bool ok = false;
  std::vector<std::string> messages;
};

// Rebuilds the game from the data embedded in a result file and re-certifies
// every reported epsilon.
VerifyReport verify_result_file(const std::string& path);

// One sweep point: a per-customer distortion vector (scalars are expanded).
struct AlphaPoint {
  std::string label;
  std::vector<double> alphas;
  bool scalar = false;
  double scalar_value = 0.0;
};

struct SweepRow {
  std::string label;
  bool scalar = false;
  double alpha = 0.0;
  double pt_load = 0.0;
  double pt_eps = 0.0;
  bool converged = false;
};

struct SweepResult {
  int hour = 0;
  double eut_load = 0.0;
  double eut_eps = 0.0;
  bool eut_converged = false;
  std::vector<SweepRow> rows;
  // Alpha at which the PT load crosses the EUT level, interpolated between
  // adjacent scalar points; absent when the sweep never crosses.
  std::optional<double> crossover_alpha;
};

// One full PT solve per alpha point plus one EUT reference solve, all from
// the scenario's shared initial profile.
SweepResult sweep_alpha(const ResolvedScenario& resolved,
                        const std::vector<AlphaPoint>& points, int hour);

std::vector<std::string> emit_sweep(const SweepResult& sweep, const std::string& out_dir);

}  // namespace dsm
