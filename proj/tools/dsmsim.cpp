// dsmsim: demand-side-management game runner.
//
//   dsmsim run <scenario.json> --out <dir> [--seed N] [--mode eut|pt|both]
//   dsmsim sweep-alpha <scenario.json> --alphas a1,a2,... --hour H --out <dir> [--seed N]
//   dsmsim verify <result.json>
//
// Exit codes: 0 success, 2 validation error, 3 non-convergence, 1 other.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsmgame/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

double parse_alpha(const std::string& token) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw dsm::ValidationError("sweep: cannot parse alpha '" + token + "'");
  }
}

// Each comma-separated token is either a scalar alpha applied to every
// customer or a colon-separated per-customer vector.
std::vector<dsm::AlphaPoint> parse_alpha_points(const std::string& spec, int num_customers) {
  std::vector<dsm::AlphaPoint> points;
  for (const std::string& token : split(spec, ',')) {
    if (token.empty()) continue;
    dsm::AlphaPoint point;
    point.label = token;
    const std::vector<std::string> parts = split(token, ':');
    if (parts.size() == 1) {
      point.scalar = true;
      point.scalar_value = parse_alpha(parts[0]);
      point.alphas.assign(num_customers, point.scalar_value);
    } else {
      for (const auto& part : parts) point.alphas.push_back(parse_alpha(part));
    }
    points.push_back(std::move(point));
  }
  if (points.empty()) throw dsm::ValidationError("sweep: --alphas is empty");
  return points;
}

int run_command(const std::string& scenario_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed, const std::string& mode) {
  dsm::Scenario scenario = dsm::parse_scenario_file(scenario_path);
  if (mode == "eut" || mode == "pt") {
    scenario.modes = {mode};
  } else if (mode == "both") {
    scenario.modes = {"eut", "pt"};
  } else if (!mode.empty()) {
    throw dsm::ValidationError("run: unknown --mode '" + mode + "'");
  }

  const dsm::ResolvedScenario resolved = dsm::resolve_scenario(scenario, seed);
  const dsm::RunResult result = dsm::run_scenario(resolved);
  for (const std::string& path : dsm::emit_results(result, out_dir)) {
    std::cout << "wrote " << path << "\n";
  }

  bool all_converged = true;
  for (const auto& m : result.modes) {
    std::cout << m.mode << ": " << (m.converged ? "converged" : "NOT converged") << " after "
              << m.iterations << " iterations, certified epsilon " << m.eps.max_eps
              << " (threshold " << m.eps_threshold << ")\n";
    all_converged = all_converged && m.converged;
  }
  return all_converged ? 0 : kExitNoConvergence;
}

int sweep_command(const std::string& scenario_path, const std::string& alphas, int hour,
                  const std::string& out_dir, std::optional<std::uint64_t> seed) {
  const dsm::Scenario scenario = dsm::parse_scenario_file(scenario_path);
  const dsm::ResolvedScenario resolved = dsm::resolve_scenario(scenario, seed);
  const auto points =
      parse_alpha_points(alphas, static_cast<int>(scenario.customers.size()));
  const dsm::SweepResult sweep = dsm::sweep_alpha(resolved, points, hour);
  for (const std::string& path : dsm::emit_sweep(sweep, out_dir)) {
    std::cout << "wrote " << path << "\n";
  }

  std::cout << "hour " << sweep.hour << ": EUT nonparticipating load " << sweep.eut_load << "\n";
  for (const auto& row : sweep.rows) {
    std::cout << "  alpha " << row.label << ": PT load " << row.pt_load
              << (row.converged ? "" : " (NOT converged)") << "\n";
  }
  if (sweep.crossover_alpha) {
    std::cout << "PT load crosses the EUT level near alpha " << *sweep.crossover_alpha << "\n";
  } else {
    std::cout << "no PT/EUT crossover inside the sweep range\n";
  }

  bool all_converged = sweep.eut_converged;
  for (const auto& row : sweep.rows) all_converged = all_converged && row.converged;
  return all_converged ? 0 : kExitNoConvergence;
}

int verify_command(const std::string& result_path) {
  const dsm::VerifyReport report = dsm::verify_result_file(result_path);
  for (const auto& message : report.messages) std::cout << message << "\n";
  if (!report.ok) {
    std::cerr << "verification FAILED\n";
    return kExitValidation;
  }
  std::cout << "verification OK\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demand-side-management load shifting game simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", mode, alphas, result_path;
  int hour = 19;
  std::optional<std::uint64_t> seed;

  CLI::App* run = app.add_subcommand("run", "Solve a scenario and emit result files");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Force a seeded random-simplex initial profile");
  run->add_option("--mode", mode, "eut, pt or both (default: scenario's modes)");

  CLI::App* sweep = app.add_subcommand("sweep-alpha", "PT solve per alpha, against one EUT run");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sweep->add_option("--alphas", alphas, "Comma-separated alphas; colon-separated for per-customer")
      ->required();
  sweep->add_option("--hour", hour, "Hour the nonparticipating load is reported at")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--seed", seed, "Force a seeded random-simplex initial profile");

  CLI::App* verify = app.add_subcommand("verify", "Re-certify the epsilons in a result file");
  verify->add_option("result", result_path, "result.json produced by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(scenario_path, out_dir, seed, mode);
    if (sweep->parsed()) return sweep_command(scenario_path, alphas, hour, out_dir, seed);
    return verify_command(result_path);
  } catch (const dsm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
