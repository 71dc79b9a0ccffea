#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridlink/pso_optimizer.hpp"
#include "hybridlink/snr_budget.hpp"

namespace hybridlink {

enum class Command { simulate, optimize, compare };

std::string_view to_string(Command c);

std::string_view tool_version();

/// Everything needed to repeat a run. Written to manifest.json in the output
/// directory alongside the reports.
struct RunManifest {
  Command command = Command::simulate;
  std::vector<std::filesystem::path> config_paths;  // compare: {a, b}
  std::filesystem::path output_directory = ".";
  std::uint64_t seed = 1;
  std::optional<Fidelity> fidelity;  // unset: as configured (optimize: fast)
  Fidelity rescore_fidelity = Fidelity::reference;
  int threads = 0;                   // 0: environment or hardware
  bool trace_power_evolution = false;
  bool nli_breakdown = false;
  std::optional<int> iterations;
  std::optional<int> particles;
  std::string timestamp;             // filled by the runner when empty
};

/// Per-channel gain spectrum of the first span.
struct GainSpectrum {
  std::vector<double> frequency_hz;
  std::vector<double> raman_on_off_db;
  std::vector<double> edfa_db;
  std::vector<double> total_db;
};

/// Raman on-off gain (pumps on vs. off at equal launch) and EDFA gain.
GainSpectrum gain_spectrum(const ScenarioConfig& scenario, const LinkEvaluation& evaluation);

void write_snr_csv(const std::filesystem::path& path, const LinkResult& result);
void write_gain_csv(const std::filesystem::path& path, const GainSpectrum& gain);
void write_power_evolution_csv(const std::filesystem::path& path, const ScenarioConfig& scenario,
                               const SpanSolution& span);
void write_nli_csv(const std::filesystem::path& path, const ScenarioConfig& scenario, const LinkEvaluation& evaluation);
void write_trace_csv(const std::filesystem::path& path, const PsoResult& result);

struct SimulateReport {
  ScenarioConfig scenario;
  LinkEvaluation evaluation;
  double wall_time_s = 0.0;
};

/// Loads, evaluates and writes snr.csv, gain.csv, summary.json,
/// manifest.json (+ power_evolution.csv, nli.csv when requested).
SimulateReport run_simulate(RunManifest manifest);

struct OptimizeReport {
  OptimizationProblem problem;
  PsoResult pso;
  double search_throughput_bps = 0.0;
  double rescored_throughput_bps = 0.0;
  double wall_time_s = 0.0;
};

/// Runs the swarm, writes trace.csv, result.json, manifest.json and a
/// simulate-style report of the best scenario under best/.
OptimizeReport run_optimize(RunManifest manifest);

struct CompareReport {
  SimulateReport a;
  SimulateReport b;
  double delta_bps = 0.0;
  double delta_percent = 0.0;
};

/// Evaluates two scenarios and writes compare.csv, compare.json and
/// manifest.json. Deltas are a relative to b.
CompareReport run_compare(RunManifest manifest);

}  // namespace hybridlink
