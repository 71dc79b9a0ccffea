#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridlink/link_config.hpp"
#include "hybridlink/settings.hpp"

namespace hybridlink {

/// Cost assigned to a particle whose evaluation failed or was not finite.
inline constexpr double kWorstCost = std::numeric_limits<double>::lowest();

struct PsoParams {
  int n_particles = 50;
  int max_iterations = 50;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  double velocity_clamp_fraction = 0.5;
  std::uint64_t seed = 1;
  int threads = 1;
};

void validate(const PsoParams& params);

struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }
};

void validate(const Bounds& bounds);

struct TraceEntry {
  int iteration = 0;
  double best_cost = kWorstCost;
  std::vector<double> best_position;
};

struct PsoResult {
  std::vector<double> best_position;
  double best_cost = kWorstCost;
  std::vector<TraceEntry> trace;
  long evaluations = 0;
  std::vector<std::string> log;  // one line per penalized evaluation
};

/// Cost to maximize. Must be safe to call concurrently when threads > 1.
using CostFunction = std::function<double(std::span<const double>)>;

/// Global-best PSO maximizing `cost` over the box `bounds`.
///
/// Iteration 1 evaluates the initial uniform sample; each further iteration
/// moves every particle once. Each particle owns a generator seeded from
/// (seed, index), so the result does not depend on the thread count.
PsoResult maximize(const CostFunction& cost, const Bounds& bounds, const PsoParams& params);

enum class Encoding { powers_only, powers_and_wavelengths };

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view s);

/// Decision vector layout:
///   powers_only:            [P_1 .. P_n (W), launch (dBm)]
///   powers_and_wavelengths: [P_1 .. P_n (W), lambda_1 .. lambda_n (nm), launch (dBm)]
struct OptimizationProblem {
  Encoding encoding = Encoding::powers_only;
  Bounds bounds;
  ScenarioConfig scenario_template;
  Fidelity fidelity = Fidelity::fast;
  std::vector<double> preset_wavelengths_m;
  PumpDirection pump_direction = PumpDirection::backward;

  std::size_t n_pumps() const { return preset_wavelengths_m.size(); }
  std::size_t dimension() const;
};

struct ProblemOptions {
  Encoding encoding = Encoding::powers_only;
  Fidelity fidelity = Fidelity::fast;
  double launch_low_dbm = 15.0;
  double launch_high_dbm = 25.0;
  std::vector<double> preset_wavelengths_m = {1470e-9, 1499e-9, 1502e-9, 1480e-9, 1510e-9, 1520e-9};
};

/// Bounds come from the options (launch) and the template's pump limits.
OptimizationProblem make_amplifier_problem(const ScenarioConfig& scenario_template, const ProblemOptions& options);

void validate(const OptimizationProblem& problem);

/// Scenario for a decision vector, at the problem's fidelity.
ScenarioConfig decode(const OptimizationProblem& problem, std::span<const double> x);

struct CandidateEvaluation {
  double throughput_bps = kWorstCost;
  bool ok = false;
  std::string diagnostic;
};

/// Throughput of the decoded scenario. Pipeline failures give kWorstCost
/// and a diagnostic instead of throwing.
CandidateEvaluation evaluate_candidate(const OptimizationProblem& problem, std::span<const double> x, int threads = 1);

/// Throughput cost bound to `problem`, for maximize().
CostFunction throughput_cost(const OptimizationProblem& problem, int nli_threads = 1);

/// Optimizer file: a scenario plus an "optimizer" object holding the
/// problem options and PSO parameters.
struct OptimizerConfig {
  ScenarioConfig scenario;
  ProblemOptions problem;
  PsoParams pso;
};

OptimizerConfig load_optimizer_config(const std::filesystem::path& path);
OptimizerConfig parse_optimizer_config(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace hybridlink
