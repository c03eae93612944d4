#include "dsmgame/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dsm {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path, const char* stage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(std::string(stage) + ": cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shortest representation that round-trips, for deterministic CSV output.
std::string format_double(double v) { return json(v).dump(); }

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, int row, const std::string& column) {
  const std::string t = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError("csv: row " + std::to_string(row) + ", column '" + column +
                          "': non-numeric cell '" + cell + "'");
  }
  return value;
}

}  // namespace

std::vector<LoadProfile> ingest_csv(const std::string& path, const CsvIngestOptions& options) {
  if (options.horizon < 2) throw ValidationError("csv: horizon must be >= 2");
  if (!options.shares.empty() && !options.aggregate_column) {
    throw ValidationError("csv: share customers need an aggregate column");
  }
  const std::string text = read_file(path, "csv");

  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ValidationError("csv: '" + path + "' is empty");

  const std::vector<std::string> header = split_csv_line(lines[0]);
  const auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ValidationError("csv: missing column '" + name + "' in '" + path + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const int rows = static_cast<int>(lines.size()) - 1;
  if (rows != options.horizon) {
    throw ValidationError("csv: expected " + std::to_string(options.horizon) +
                          " data rows (one per hour), found " + std::to_string(rows));
  }

  std::vector<std::vector<std::string>> cells(rows);
  for (int r = 0; r < rows; ++r) {
    cells[r] = split_csv_line(lines[r + 1]);
    if (cells[r].size() != header.size()) {
      throw ValidationError("csv: row " + std::to_string(r + 1) + " has " +
                            std::to_string(cells[r].size()) + " fields, header has " +
                            std::to_string(header.size()));
    }
  }

  const auto read_column = [&](const std::string& name) {
    const std::size_t c = column_index(name);
    std::vector<double> out(rows);
    for (int r = 0; r < rows; ++r) {
      out[r] = parse_cell(cells[r][c], r + 1, name);
      if (out[r] < 0.0) {
        throw ValidationError("csv: negative demand at row " + std::to_string(r + 1) +
                              ", column '" + name + "'");
      }
    }
    return out;
  };

  std::vector<LoadProfile> profiles;
  for (const auto& spec : options.columns) {
    profiles.push_back({spec.customer_id, read_column(spec.column)});
  }
  if (!options.shares.empty()) {
    const std::vector<double> aggregate = read_column(*options.aggregate_column);
    double total_share = 0.0;
    for (const auto& spec : options.shares) total_share += spec.share;
    if (std::abs(total_share - 1.0) > 1e-9) {
      throw ValidationError("csv: aggregate shares sum to " + std::to_string(total_share) +
                            ", expected 1");
    }
    for (const auto& spec : options.shares) {
      if (!(spec.share > 0.0)) throw ValidationError("csv: shares must be > 0");
      std::vector<double> demand(rows);
      for (int r = 0; r < rows; ++r) demand[r] = spec.share * aggregate[r];
      profiles.push_back({spec.customer_id, std::move(demand)});
    }
  }
  return profiles;
}

// ---------------------------------------------------------------------------
// Scenario JSON
// ---------------------------------------------------------------------------

namespace {

json init_to_json(const InitSpec& init) {
  if (std::holds_alternative<UniformInit>(init)) return "uniform";
  if (const auto* e = std::get_if<ExplicitInit>(&init)) return json{{"explicit", e->probs}};
  return json{{"random_simplex", std::get<RandomSimplexInit>(init).seed}};
}

InitSpec init_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return UniformInit{};
    throw ValidationError("scenario: unknown init '" + j.get<std::string>() + "'");
  }
  if (j.is_object()) {
    if (j.contains("random_simplex")) {
      return RandomSimplexInit{j.at("random_simplex").get<std::uint64_t>()};
    }
    if (j.contains("explicit")) {
      return ExplicitInit{j.at("explicit").get<std::vector<std::vector<double>>>()};
    }
  }
  throw ValidationError("scenario: init must be \"uniform\", {\"random_simplex\": seed} "
                        "or {\"explicit\": [[...]]}");
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["horizon"] = s.horizon;
  j["price_scale"] = s.price_scale;
  if (s.demand_csv) j["demand_csv"] = *s.demand_csv;
  if (s.aggregate_column) j["aggregate_column"] = *s.aggregate_column;
  json customers = json::array();
  for (const auto& c : s.customers) {
    json jc;
    jc["id"] = c.id;
    jc["gamma"] = c.gamma;
    jc["alpha"] = c.alpha;
    jc["actions"] = c.actions;
    switch (c.demand.kind) {
      case DemandSourceSpec::Kind::Values:
        jc["demand"] = json{{"values", c.demand.values}};
        break;
      case DemandSourceSpec::Kind::Column:
        jc["demand"] = json{{"column", c.demand.column}};
        break;
      case DemandSourceSpec::Kind::Share:
        jc["demand"] = json{{"share", c.demand.share}};
        break;
    }
    customers.push_back(std::move(jc));
  }
  j["customers"] = std::move(customers);
  json target;
  if (s.target.historical) target["historical"] = *s.target.historical;
  json multipliers = json::array();
  for (const auto& [hour, factor] : s.target.multipliers) {
    multipliers.push_back(json{{"hour", hour}, {"factor", factor}});
  }
  target["multipliers"] = std::move(multipliers);
  j["target"] = std::move(target);
  j["solver"] = json{{"lambda", s.solver.lambda},
                     {"max_iter", s.solver.max_iter},
                     {"eps_stop", s.solver.eps_stop},
                     {"check_every", s.solver.check_every},
                     {"snapshot_every", s.solver.snapshot_every},
                     {"init", init_to_json(s.solver.init)}};
  j["modes"] = s.modes;
  j["trace_customer"] = s.trace_customer;
  return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

Scenario scenario_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ValidationError("scenario: top level must be a JSON object");
  Scenario s;
  s.base_dir = base_dir;
  s.name = get_or<std::string>(j, "name", "scenario");
  s.horizon = get_or<int>(j, "horizon", 24);
  if (s.horizon < 2) throw ValidationError("scenario: horizon must be >= 2");
  s.price_scale = get_or<double>(j, "price_scale", 1.0);
  if (!(s.price_scale > 0.0)) throw ValidationError("scenario: price_scale must be > 0");
  if (j.contains("demand_csv")) s.demand_csv = j.at("demand_csv").get<std::string>();
  if (j.contains("aggregate_column")) {
    s.aggregate_column = j.at("aggregate_column").get<std::string>();
  }

  if (!j.contains("customers") || !j.at("customers").is_array() || j.at("customers").empty()) {
    throw ValidationError("scenario: at least one customer required");
  }
  std::set<std::string> ids;
  for (const auto& jc : j.at("customers")) {
    CustomerSpec c;
    c.id = jc.at("id").get<std::string>();
    if (!ids.insert(c.id).second) {
      throw ValidationError("scenario: duplicate customer id '" + c.id + "'");
    }
    c.gamma = get_or<double>(jc, "gamma", 0.6);
    if (!(c.gamma > 0.0 && c.gamma <= 1.0)) {
      throw ValidationError("scenario: gamma of '" + c.id + "' outside (0,1]");
    }
    c.alpha = get_or<double>(jc, "alpha", 1.0);
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) {
      throw ValidationError("scenario: alpha of '" + c.id + "' outside (0,1]");
    }
    c.actions = jc.at("actions").get<std::vector<int>>();
    if (!jc.contains("demand") || !jc.at("demand").is_object()) {
      throw ValidationError("scenario: customer '" + c.id + "' needs a demand source");
    }
    const json& jd = jc.at("demand");
    const int sources = static_cast<int>(jd.contains("values")) +
                        static_cast<int>(jd.contains("column")) +
                        static_cast<int>(jd.contains("share"));
    if (sources != 1) {
      throw ValidationError("scenario: demand of '" + c.id +
                            "' must have exactly one of values/column/share");
    }
    if (jd.contains("values")) {
      c.demand.kind = DemandSourceSpec::Kind::Values;
      c.demand.values = jd.at("values").get<std::vector<double>>();
    } else if (jd.contains("column")) {
      c.demand.kind = DemandSourceSpec::Kind::Column;
      c.demand.column = jd.at("column").get<std::string>();
    } else {
      c.demand.kind = DemandSourceSpec::Kind::Share;
      c.demand.share = jd.at("share").get<double>();
    }
    s.customers.push_back(std::move(c));
  }

  if (j.contains("target")) {
    const json& jt = j.at("target");
    if (jt.contains("historical")) {
      s.target.historical = jt.at("historical").get<std::vector<double>>();
    }
    for (const auto& jm : get_or<json>(jt, "multipliers", json::array())) {
      s.target.multipliers.emplace_back(jm.at("hour").get<int>(), jm.at("factor").get<double>());
    }
  }

  if (j.contains("solver")) {
    const json& js = j.at("solver");
    s.solver.lambda = get_or<double>(js, "lambda", s.solver.lambda);
    s.solver.max_iter = get_or<long>(js, "max_iter", s.solver.max_iter);
    s.solver.eps_stop = get_or<double>(js, "eps_stop", s.solver.eps_stop);
    s.solver.check_every = get_or<long>(js, "check_every", s.solver.check_every);
    s.solver.snapshot_every = get_or<long>(js, "snapshot_every", s.solver.snapshot_every);
    if (js.contains("init")) s.solver.init = init_from_json(js.at("init"));
  }

  s.modes = get_or<std::vector<std::string>>(j, "modes", {"eut", "pt"});
  for (const auto& mode : s.modes) {
    if (mode != "eut" && mode != "pt") {
      throw ValidationError("scenario: unknown mode '" + mode + "'");
    }
  }
  s.trace_customer = get_or<std::string>(j, "trace_customer", s.customers.front().id);
  return s;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  try {
    return scenario_from_json(j, base_dir);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

Scenario parse_scenario_file(const std::string& path) {
  const std::string text = read_file(path, "scenario");
  return parse_scenario_text(text, std::filesystem::path(path).parent_path().string());
}

std::string scenario_canonical_json(const Scenario& scenario) {
  return scenario_to_json(scenario).dump();
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

ResolvedScenario resolve_scenario(const Scenario& scenario,
                                  std::optional<std::uint64_t> seed_override) {
  ResolvedScenario r;
  r.scenario = scenario;

  if (seed_override) {
    // --seed forces a seeded random-simplex start regardless of the file.
    r.scenario.solver.init = RandomSimplexInit{*seed_override};
  }

  CsvIngestOptions csv;
  csv.horizon = scenario.horizon;
  csv.aggregate_column = scenario.aggregate_column;
  for (const auto& c : scenario.customers) {
    switch (c.demand.kind) {
      case DemandSourceSpec::Kind::Column:
        csv.columns.push_back({c.id, c.demand.column});
        break;
      case DemandSourceSpec::Kind::Share:
        csv.shares.push_back({c.id, c.demand.share});
        break;
      case DemandSourceSpec::Kind::Values:
        break;
    }
  }
  std::vector<LoadProfile> from_csv;
  if (!csv.columns.empty() || !csv.shares.empty()) {
    if (!scenario.demand_csv) {
      throw ValidationError("scenario: csv-backed customers need demand_csv");
    }
    std::filesystem::path p(*scenario.demand_csv);
    if (p.is_relative() && !scenario.base_dir.empty()) {
      p = std::filesystem::path(scenario.base_dir) / p;
    }
    from_csv = ingest_csv(p.string(), csv);
  }

  for (const auto& c : scenario.customers) {
    if (c.demand.kind == DemandSourceSpec::Kind::Values) {
      if (static_cast<int>(c.demand.values.size()) != scenario.horizon) {
        throw ValidationError("scenario: demand of '" + c.id + "' has " +
                              std::to_string(c.demand.values.size()) + " hours, expected " +
                              std::to_string(scenario.horizon));
      }
      for (double v : c.demand.values) {
        if (!(v >= 0.0)) {
          throw ValidationError("scenario: negative demand for '" + c.id + "'");
        }
      }
      r.profiles.push_back({c.id, c.demand.values});
    } else {
      // ingest_csv returns column-backed customers first, then share-backed;
      // match by id to restore declaration order.
      const auto it = std::find_if(from_csv.begin(), from_csv.end(),
                                   [&](const LoadProfile& p) { return p.customer_id == c.id; });
      r.profiles.push_back(*it);
    }
  }

  const int n = static_cast<int>(scenario.customers.size());
  r.params.sentinel_action = scenario.horizon;
  r.params.price_scale = scenario.price_scale;
  for (const auto& c : scenario.customers) {
    r.params.gamma.push_back(c.gamma);
    r.weights.alpha.push_back(c.alpha);
    r.action_sets.push_back(c.actions);
  }

  std::vector<double> historical;
  if (scenario.target.historical) {
    historical = *scenario.target.historical;
    if (static_cast<int>(historical.size()) != scenario.horizon) {
      throw ValidationError("scenario: target.historical length differs from horizon");
    }
  } else {
    historical.assign(scenario.horizon, 0.0);
    for (const auto& p : r.profiles) {
      for (int h = 0; h < scenario.horizon; ++h) historical[h] += p.demand[h];
    }
  }
  r.target = build_target(historical, scenario.target.multipliers);

  if (const auto* random_init = std::get_if<RandomSimplexInit>(&r.scenario.solver.init)) {
    r.seed = random_init->seed;
    std::vector<std::size_t> counts;
    for (const auto& set : r.action_sets) counts.push_back(set.size());
    r.initial_profile = random_simplex_profile(counts, r.seed);
  } else if (const auto* explicit_init = std::get_if<ExplicitInit>(&r.scenario.solver.init)) {
    r.initial_profile = explicit_init->probs;
    if (static_cast<int>(r.initial_profile.size()) != n) {
      throw ValidationError("scenario: explicit init needs one row per customer");
    }
  } else {
    for (const auto& set : r.action_sets) {
      r.initial_profile.emplace_back(set.size(), 1.0 / static_cast<double>(set.size()));
    }
  }

  const auto trace_it =
      std::find_if(scenario.customers.begin(), scenario.customers.end(),
                   [&](const CustomerSpec& c) { return c.id == scenario.trace_customer; });
  if (trace_it == scenario.customers.end()) {
    throw ValidationError("scenario: trace_customer '" + scenario.trace_customer +
                          "' is not a customer id");
  }
  r.trace_customer_index = static_cast<int>(trace_it - scenario.customers.begin());
  return r;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double expected_nonparticipating_load(const MixedStrategyProfile& profile,
                                      const std::vector<LoadProfile>& profiles,
                                      const std::vector<ActionSet>& action_sets,
                                      int sentinel, int hour) {
  if (profiles.size() != action_sets.size() ||
      profile.probs().size() != action_sets.size()) {
    throw ValidationError("nonparticipating_load: inconsistent customer counts");
  }
  // The participation indicator factorizes per customer, so the joint-action
  // expectation collapses to a per-customer sum.
  double total = 0.0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (hour < 1 || hour > static_cast<int>(profiles[i].demand.size())) {
      throw ValidationError("nonparticipating_load: hour out of range");
    }
    double not_participating = 0.0;
    for (std::size_t j = 0; j < action_sets[i].size(); ++j) {
      const int a = action_sets[i][j];
      if (a == sentinel || a > hour) not_participating += profile.of(static_cast<int>(i))[j];
    }
    total += profiles[i].demand[hour - 1] * not_participating;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxTraceRows = 2000;

ModeResult run_mode(const std::string& mode_name, const GameTable& game,
                    const ResolvedScenario& resolved) {
  SolverConfig config;
  config.lambda = resolved.scenario.solver.lambda;
  config.max_iter = resolved.scenario.solver.max_iter;
  config.eps_stop = resolved.scenario.solver.eps_stop;
  config.check_every = resolved.scenario.solver.check_every;
  config.snapshot_every = resolved.scenario.solver.snapshot_every;
  config.init = ExplicitInit{resolved.initial_profile};
  config.mode = mode_name == "pt" ? EvalMode::pt(resolved.weights) : EvalMode::eut();

  const SolveResult solved = solve(game, config);

  ModeResult out;
  out.mode = mode_name;
  out.profile = solved.profile.probs();
  out.eps = solved.eps;
  out.eps_threshold = solved.eps_threshold;
  out.cost_spread = solved.cost_spread;
  out.converged = solved.converged;
  out.iterations = solved.iterations;
  const int horizon = resolved.scenario.horizon;
  out.nonparticipating.resize(horizon);
  for (int hour = 1; hour <= horizon; ++hour) {
    out.nonparticipating[hour - 1] = expected_nonparticipating_load(
        solved.profile, resolved.profiles, resolved.action_sets,
        resolved.params.sentinel_action, hour);
  }
  out.rate = convergence_rate(solved.trace);
  out.cycle_period = cycle_detect(solved.trace);
  out.gap_bound_violations = solved.trace.gap_bound_violations;
  out.step_norm_violations = solved.trace.step_norm_violations;

  const std::size_t total = solved.trace.snapshots.size();
  const std::size_t stride = total <= kMaxTraceRows ? 1 : (total + kMaxTraceRows - 1) / kMaxTraceRows;
  for (std::size_t s = 0; s < total; s += stride) {
    out.trace_iterations.push_back(solved.trace.snapshot_iterations[s]);
    out.trace_probs.push_back(solved.trace.snapshots[s][resolved.trace_customer_index]);
  }
  if (total > 0 && (total - 1) % stride != 0) {  // keep the final iterate
    out.trace_iterations.push_back(solved.trace.snapshot_iterations.back());
    out.trace_probs.push_back(solved.trace.snapshots.back()[resolved.trace_customer_index]);
  }
  return out;
}

}  // namespace

RunResult run_scenario(const ResolvedScenario& resolved) {
  const GameTable game = dsm_game_build(resolved.profiles, resolved.target, resolved.params,
                                        resolved.action_sets);
  RunResult result;
  result.scenario_name = resolved.scenario.name;
  result.scenario_echo = scenario_canonical_json(resolved.scenario);
  result.horizon = resolved.scenario.horizon;
  result.price_scale = resolved.params.price_scale;
  result.sentinel = resolved.params.sentinel_action;
  for (const auto& c : resolved.scenario.customers) result.customer_ids.push_back(c.id);
  result.gammas = resolved.params.gamma;
  result.alphas = resolved.weights.alpha;
  result.action_sets = resolved.action_sets;
  for (const auto& p : resolved.profiles) result.demand.push_back(p.demand);
  result.target = resolved.target.target;
  result.actual_demand.assign(resolved.scenario.horizon, 0.0);
  for (const auto& p : resolved.profiles) {
    for (int h = 0; h < resolved.scenario.horizon; ++h) result.actual_demand[h] += p.demand[h];
  }
  result.initial_profile = resolved.initial_profile;
  result.trace_customer_index = resolved.trace_customer_index;
  result.seed = resolved.seed;
  result.config_hash = [&] {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a(result.scenario_echo + ":" + std::to_string(result.seed))));
    return std::string(buf);
  }();
  result.timestamp = utc_timestamp();

  for (const auto& mode : resolved.scenario.modes) {
    result.modes.push_back(run_mode(mode, game, resolved));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

const ModeResult* find_mode(const RunResult& result, const std::string& name) {
  for (const auto& m : result.modes) {
    if (m.mode == name) return &m;
  }
  return nullptr;
}

json rate_to_json(const RateEstimate& rate) {
  json j;
  j["available"] = rate.available;
  if (rate.available) {
    j["value"] = rate.value;
    j["window_first"] = rate.window_first;
    j["window_last"] = rate.window_last;
    j["samples"] = rate.samples;
  }
  return j;
}

json mode_to_json(const ModeResult& m) {
  json j;
  j["mode"] = m.mode;
  j["profile"] = m.profile;
  j["epsilon"] = json{{"per_customer", m.eps.per_player},
                      {"max", m.eps.max_eps},
                      {"threshold", m.eps_threshold},
                      {"cost_spread", m.cost_spread}};
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["nonparticipating_load"] = m.nonparticipating;
  j["rate"] = rate_to_json(m.rate);
  j["cycle_period"] = m.cycle_period ? json(*m.cycle_period) : json(nullptr);
  j["gap_bound_violations"] = m.gap_bound_violations;
  j["step_norm_violations"] = m.step_norm_violations;
  j["trace_iterations"] = m.trace_iterations;
  j["trace_probs"] = m.trace_probs;
  return j;
}

ModeResult mode_from_json(const json& j) {
  ModeResult m;
  m.mode = j.at("mode").get<std::string>();
  m.profile = j.at("profile").get<std::vector<std::vector<double>>>();
  m.eps.per_player = j.at("epsilon").at("per_customer").get<std::vector<double>>();
  m.eps.max_eps = j.at("epsilon").at("max").get<double>();
  m.eps_threshold = j.at("epsilon").at("threshold").get<double>();
  m.cost_spread = j.at("epsilon").at("cost_spread").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<long>();
  m.nonparticipating = j.at("nonparticipating_load").get<std::vector<double>>();
  const json& jr = j.at("rate");
  m.rate.available = jr.at("available").get<bool>();
  if (m.rate.available) {
    m.rate.value = jr.at("value").get<double>();
    m.rate.window_first = jr.at("window_first").get<long>();
    m.rate.window_last = jr.at("window_last").get<long>();
    m.rate.samples = jr.at("samples").get<long>();
  }
  if (!j.at("cycle_period").is_null()) m.cycle_period = j.at("cycle_period").get<int>();
  m.gap_bound_violations = j.at("gap_bound_violations").get<long>();
  m.step_norm_violations = j.at("step_norm_violations").get<long>();
  m.trace_iterations = j.at("trace_iterations").get<std::vector<long>>();
  m.trace_probs = j.at("trace_probs").get<std::vector<std::vector<double>>>();
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string result_to_json(const RunResult& result) {
  json j;
  j["scenario_name"] = result.scenario_name;
  j["scenario"] = json::parse(result.scenario_echo);
  j["horizon"] = result.horizon;
  j["price_scale"] = result.price_scale;
  j["sentinel"] = result.sentinel;
  j["customers"] = result.customer_ids;
  j["gamma"] = result.gammas;
  j["alpha"] = result.alphas;
  j["action_sets"] = result.action_sets;
  j["demand"] = result.demand;
  j["target"] = result.target;
  j["actual_demand"] = result.actual_demand;
  j["initial_profile"] = result.initial_profile;
  j["trace_customer_index"] = result.trace_customer_index;
  json modes = json::array();
  for (const auto& m : result.modes) modes.push_back(mode_to_json(m));
  j["modes"] = std::move(modes);
  j["provenance"] = json{{"config_hash", result.config_hash},
                         {"seed", result.seed},
                         {"timestamp", result.timestamp}};
  return j.dump(2) + "\n";
}

RunResult read_result_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path, "result"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("result: invalid JSON: ") + e.what());
  }
  try {
    RunResult r;
    r.scenario_name = j.at("scenario_name").get<std::string>();
    r.scenario_echo = j.at("scenario").dump();
    r.horizon = j.at("horizon").get<int>();
    r.price_scale = j.at("price_scale").get<double>();
    r.sentinel = j.at("sentinel").get<int>();
    r.customer_ids = j.at("customers").get<std::vector<std::string>>();
    r.gammas = j.at("gamma").get<std::vector<double>>();
    r.alphas = j.at("alpha").get<std::vector<double>>();
    r.action_sets = j.at("action_sets").get<std::vector<ActionSet>>();
    r.demand = j.at("demand").get<std::vector<std::vector<double>>>();
    r.target = j.at("target").get<std::vector<double>>();
    r.actual_demand = j.at("actual_demand").get<std::vector<double>>();
    r.initial_profile = j.at("initial_profile").get<std::vector<std::vector<double>>>();
    r.trace_customer_index = j.at("trace_customer_index").get<int>();
    for (const auto& jm : j.at("modes")) r.modes.push_back(mode_from_json(jm));
    r.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    r.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    r.timestamp = j.at("provenance").at("timestamp").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("result: ") + e.what());
  }
}

std::vector<std::string> emit_results(const RunResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;

  const auto emit = [&](const char* name, const std::string& text) {
    const auto path = dir / name;
    write_text(path, text);
    written.push_back(path.string());
  };

  emit("result.json", result_to_json(result));
  if (result.modes.empty()) return written;

  const ModeResult* eut = find_mode(result, "eut");
  const ModeResult* pt = find_mode(result, "pt");

  {
    std::string csv = "customer,action,eut_prob,pt_prob\n";
    for (std::size_t i = 0; i < result.customer_ids.size(); ++i) {
      for (std::size_t jpos = 0; jpos < result.action_sets[i].size(); ++jpos) {
        csv += result.customer_ids[i];
        csv += ',';
        csv += std::to_string(result.action_sets[i][jpos]);
        csv += ',';
        if (eut) csv += format_double(eut->profile[i][jpos]);
        csv += ',';
        if (pt) csv += format_double(pt->profile[i][jpos]);
        csv += '\n';
      }
    }
    emit("strategies.csv", csv);
  }

  {
    std::string csv = "hour,actual_demand,eut_expected,pt_expected\n";
    for (int h = 0; h < result.horizon; ++h) {
      csv += std::to_string(h + 1);
      csv += ',';
      csv += format_double(result.actual_demand[h]);
      csv += ',';
      if (eut) csv += format_double(eut->nonparticipating[h]);
      csv += ',';
      if (pt) csv += format_double(pt->nonparticipating[h]);
      csv += '\n';
    }
    emit("nonparticipating_load.csv", csv);
  }

  {
    std::string csv = "mode,iteration";
    const auto& actions = result.action_sets[result.trace_customer_index];
    for (int a : actions) csv += ",p" + std::to_string(a);
    csv += '\n';
    for (const auto& m : result.modes) {
      for (std::size_t s = 0; s < m.trace_iterations.size(); ++s) {
        csv += m.mode;
        csv += ',';
        csv += std::to_string(m.trace_iterations[s]);
        for (double v : m.trace_probs[s]) {
          csv += ',';
          csv += format_double(v);
        }
        csv += '\n';
      }
    }
    emit("trace.csv", csv);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

VerifyReport verify_result_file(const std::string& path) {
  const RunResult result = read_result_file(path);
  VerifyReport report;
  report.ok = true;

  std::vector<LoadProfile> profiles;
  for (std::size_t i = 0; i < result.customer_ids.size(); ++i) {
    profiles.push_back({result.customer_ids[i], result.demand[i]});
  }
  ShiftParams params{result.gammas, result.price_scale, result.sentinel};
  const GameTable game = dsm_game_build(profiles, TargetProfile{result.target}, params,
                                        result.action_sets);

  for (const auto& m : result.modes) {
    const EvalMode mode =
        m.mode == "pt" ? EvalMode::pt(WeightingSpec{result.alphas}) : EvalMode::eut();
    const MixedStrategyProfile profile{m.profile};
    const EpsilonReport fresh = epsilon_of_profile(profile, game, mode);
    for (std::size_t i = 0; i < fresh.per_player.size(); ++i) {
      const double recorded = m.eps.per_player[i];
      const double tolerance = 1e-9 * std::max(1.0, std::abs(recorded));
      if (std::abs(fresh.per_player[i] - recorded) > tolerance) {
        report.ok = false;
        report.messages.push_back(
            m.mode + ": customer " + result.customer_ids[i] + " epsilon " +
            format_double(recorded) + " does not reproduce (got " +
            format_double(fresh.per_player[i]) + ")");
      }
    }
    if (report.ok) {
      report.messages.push_back(m.mode + ": certified max epsilon " +
                                format_double(fresh.max_eps) + " reproduced");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Alpha sweep
// ---------------------------------------------------------------------------

SweepResult sweep_alpha(const ResolvedScenario& resolved,
                        const std::vector<AlphaPoint>& points, int hour) {
  if (points.empty()) throw ValidationError("sweep: at least one alpha point required");
  if (hour < 1 || hour > resolved.scenario.horizon) {
    throw ValidationError("sweep: hour outside 1.." + std::to_string(resolved.scenario.horizon));
  }
  const int n = static_cast<int>(resolved.scenario.customers.size());
  for (const auto& point : points) {
    if (static_cast<int>(point.alphas.size()) != n) {
      throw ValidationError("sweep: alpha point '" + point.label + "' needs " +
                            std::to_string(n) + " entries");
    }
    for (double a : point.alphas) {
      if (!(a > 0.0 && a <= 1.0)) {
        throw ValidationError("sweep: alpha outside (0,1] in point '" + point.label + "'");
      }
    }
  }

  const GameTable game = dsm_game_build(resolved.profiles, resolved.target, resolved.params,
                                        resolved.action_sets);
  SolverConfig base;
  base.lambda = resolved.scenario.solver.lambda;
  base.max_iter = resolved.scenario.solver.max_iter;
  base.eps_stop = resolved.scenario.solver.eps_stop;
  base.check_every = resolved.scenario.solver.check_every;
  base.snapshot_every = resolved.scenario.solver.snapshot_every;
  base.init = ExplicitInit{resolved.initial_profile};

  SweepResult sweep;
  sweep.hour = hour;

  SolverConfig eut_config = base;
  eut_config.mode = EvalMode::eut();
  const SolveResult eut = solve(game, eut_config);
  sweep.eut_load = expected_nonparticipating_load(eut.profile, resolved.profiles,
                                                  resolved.action_sets,
                                                  resolved.params.sentinel_action, hour);
  sweep.eut_eps = eut.eps.max_eps;
  sweep.eut_converged = eut.converged;

  for (const auto& point : points) {
    SolverConfig config = base;
    config.mode = EvalMode::pt(WeightingSpec{point.alphas});
    const SolveResult solved = solve(game, config);
    SweepRow row;
    row.label = point.label;
    row.scalar = point.scalar;
    row.alpha = point.scalar_value;
    row.pt_load = expected_nonparticipating_load(solved.profile, resolved.profiles,
                                                 resolved.action_sets,
                                                 resolved.params.sentinel_action, hour);
    row.pt_eps = solved.eps.max_eps;
    row.converged = solved.converged;
    sweep.rows.push_back(std::move(row));
  }

  // Crossover: the alpha where the PT load meets the EUT level, interpolated
  // between adjacent scalar points of the sweep.
  std::vector<const SweepRow*> scalars;
  for (const auto& row : sweep.rows) {
    if (row.scalar) scalars.push_back(&row);
  }
  std::sort(scalars.begin(), scalars.end(),
            [](const SweepRow* a, const SweepRow* b) { return a->alpha < b->alpha; });
  for (const SweepRow* row : scalars) {
    if (row->pt_load == sweep.eut_load) {
      sweep.crossover_alpha = row->alpha;
      break;
    }
  }
  if (!sweep.crossover_alpha) {
    for (std::size_t s = 0; s + 1 < scalars.size(); ++s) {
      const double d0 = scalars[s]->pt_load - sweep.eut_load;
      const double d1 = scalars[s + 1]->pt_load - sweep.eut_load;
      if (d0 * d1 < 0.0) {
        sweep.crossover_alpha =
            scalars[s]->alpha + (scalars[s + 1]->alpha - scalars[s]->alpha) * (-d0) / (d1 - d0);
        break;
      }
    }
  }
  return sweep;
}

std::vector<std::string> emit_sweep(const SweepResult& sweep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;

  std::string csv = "alpha,pt_nonparticipating_load,eut_nonparticipating_load,converged\n";
  for (const auto& row : sweep.rows) {
    csv += row.label;
    csv += ',';
    csv += format_double(row.pt_load);
    csv += ',';
    csv += format_double(sweep.eut_load);
    csv += ',';
    csv += row.converged ? "true" : "false";
    csv += '\n';
  }
  write_text(dir / "alpha_sweep.csv", csv);
  written.push_back((dir / "alpha_sweep.csv").string());

  json j;
  j["hour"] = sweep.hour;
  j["eut_load"] = sweep.eut_load;
  j["eut_epsilon"] = sweep.eut_eps;
  j["eut_converged"] = sweep.eut_converged;
  json rows = json::array();
  for (const auto& row : sweep.rows) {
    json jr;
    jr["label"] = row.label;
    if (row.scalar) jr["alpha"] = row.alpha;
    jr["pt_load"] = row.pt_load;
    jr["pt_epsilon"] = row.pt_eps;
    jr["converged"] = row.converged;
    rows.push_back(std::move(jr));
  }
  j["points"] = std::move(rows);
  j["crossover_alpha"] = sweep.crossover_alpha ? json(*sweep.crossover_alpha) : json(nullptr);
  write_text(dir / "sweep.json", j.dump(2) + "\n");
  written.push_back((dir / "sweep.json").string());
  return written;
}

}  // namespace dsm
