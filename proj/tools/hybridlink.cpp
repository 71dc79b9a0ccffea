// hybridlink: simulate / optimize / compare for C+L links with hybrid
// Raman-EDFA amplification.
//
// Exit codes: 0 success, 2 usage, 3 validation, 4 numerical failure.

#include <cstdio>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "hybridlink/errors.hpp"
#include "hybridlink/reporting.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct Options {
  std::vector<std::string> configs;
  std::string out = "out";
  std::uint64_t seed = 1;
  std::string fidelity;
  std::string rescore_fidelity = "reference";
  int threads = 0;
  bool trace = false;
  bool nli = false;
  int iterations = 0;
  int particles = 0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--fidelity", o.fidelity, "fast|reference (default: as configured)")
      ->check(CLI::IsMember({"fast", "reference"}));
  cmd->add_option("--threads", o.threads, "Worker threads (0: HYBRIDLINK_THREADS or hardware)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--trace-power-evolution", o.trace, "Write power_evolution.csv for the first span");
  cmd->add_flag("--nli-breakdown", o.nli, "Write nli.csv with per-channel NLI terms");
}

hybridlink::RunManifest manifest_from(const Options& o, hybridlink::Command command) {
  hybridlink::RunManifest m;
  m.command = command;
  for (const auto& c : o.configs) m.config_paths.emplace_back(c);
  m.output_directory = o.out;
  m.seed = o.seed;
  if (!o.fidelity.empty()) m.fidelity = hybridlink::parse_fidelity(o.fidelity);
  m.rescore_fidelity = hybridlink::parse_fidelity(o.rescore_fidelity);
  m.threads = o.threads;
  m.trace_power_evolution = o.trace;
  m.nli_breakdown = o.nli;
  if (o.iterations > 0) m.iterations = o.iterations;
  if (o.particles > 0) m.particles = o.particles;
  return m;
}

int run(hybridlink::Command command, const Options& o) {
  using namespace hybridlink;
  const RunManifest m = manifest_from(o, command);
  switch (command) {
    case Command::simulate: {
      const auto r = run_simulate(m);
      std::printf("throughput %.4f Tbit/s over %zu channels (%.1f s) -> %s\n",
                  r.evaluation.result.total_throughput_bps / 1e12, r.evaluation.result.per_channel.size(), r.wall_time_s,
                  m.output_directory.c_str());
      break;
    }
    case Command::optimize: {
      const auto r = run_optimize(m);
      std::printf("best throughput %.4f Tbit/s (search), %.4f Tbit/s (rescored), %ld evaluations (%.1f s) -> %s\n",
                  r.search_throughput_bps / 1e12, r.rescored_throughput_bps / 1e12, r.pso.evaluations, r.wall_time_s,
                  m.output_directory.c_str());
      for (const auto& line : r.pso.log) std::fprintf(stderr, "penalized: %s\n", line.c_str());
      break;
    }
    case Command::compare: {
      const auto r = run_compare(m);
      std::printf("a %.4f Tbit/s, b %.4f Tbit/s, delta %+.4f Tbit/s (%+.2f %%) -> %s\n",
                  r.a.evaluation.result.total_throughput_bps / 1e12, r.b.evaluation.result.total_throughput_bps / 1e12,
                  r.delta_bps / 1e12, r.delta_percent, m.output_directory.c_str());
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput and SNR estimation for hybrid Raman-EDFA C+L links"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hybridlink::tool_version()));

  Options o;
  auto* sim = app.add_subcommand("simulate", "Evaluate one scenario");
  sim->add_option("--config", o.configs, "Scenario file")->required()->expected(1)->check(CLI::ExistingFile);
  add_common(sim, o);

  auto* opt = app.add_subcommand("optimize", "Search pump powers and launch power with PSO");
  opt->add_option("--config", o.configs, "Optimizer file (scenario + optimizer block)")
      ->required()
      ->expected(1)
      ->check(CLI::ExistingFile);
  add_common(opt, o);
  opt->add_option("--iterations", o.iterations, "PSO iterations (overrides the file)")->check(CLI::PositiveNumber);
  opt->add_option("--particles", o.particles, "PSO particles (overrides the file)")->check(CLI::Range(2, 1 << 20));
  opt->add_option("--rescore-fidelity", o.rescore_fidelity, "Fidelity for re-scoring the best vector")
      ->check(CLI::IsMember({"fast", "reference"}))
      ->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "Compare two scenarios (a relative to b)");
  cmp->add_option("--config", o.configs, "Scenario files a and b (give --config twice)")
      ->required()
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::ExistingFile);
  add_common(cmp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (cmp->parsed() && o.configs.size() != 2) {
    std::fprintf(stderr, "compare needs --config twice (a, then b)\n%s", cmp->help().c_str());
    return kExitUsage;
  }

  hybridlink::Command command = hybridlink::Command::simulate;
  if (opt->parsed()) command = hybridlink::Command::optimize;
  if (cmp->parsed()) command = hybridlink::Command::compare;

  try {
    return run(command, o);
  } catch (const hybridlink::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
