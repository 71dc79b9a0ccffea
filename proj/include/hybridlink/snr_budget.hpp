#pragma once

#include <span>
#include <vector>

#include "hybridlink/link_config.hpp"
#include "hybridlink/nli_engine.hpp"
#include "hybridlink/raman_solver.hpp"

namespace hybridlink {

/// Ideal lumped gain restoring the launch power: p_in / p_out.
double edfa_gain(double launch_power_w, double output_power_w);
std::vector<double> edfa_gain(const SpanSolution& span, const ChannelGrid& grid);

/// 2 (G - 1) n_sp h f B with n_sp = NF_linear / 2. Rejects G < 1.
double edfa_ase(double gain, double nf_db, double frequency_hz, double bandwidth_hz);

/// G * raman_ase + edfa_ase.
double hybrid_ase(double gain, double raman_ase_w, double edfa_ase_w);

/// 1 / (1/a + 1/b); kNoNli in either slot drops that term.
double snr_total(double snr_nli, double snr_ase);

struct Throughput {
  double total_bps = 0.0;
  std::vector<double> spectral_efficiency;  // bit/symbol, dual polarisation
};

Throughput throughput(std::span<const double> snrs, double symbol_rate_hz);

struct ChannelResult {
  double frequency_hz = 0.0;
  double launch_power_w = 0.0;
  double nli_power_w = 0.0;
  double ase_power_w = 0.0;
  double snr_nli = 0.0;
  double snr_ase = 0.0;
  double snr_total = 0.0;
  double spectral_efficiency = 0.0;
};

struct LinkResult {
  std::vector<ChannelResult> per_channel;
  double total_throughput_bps = 0.0;
  double total_launch_power_w = 0.0;
};

LinkResult assemble_link_result(const ChannelGrid& grid, std::span<const double> total_ase_w, const NliResult& nli);

struct LinkEvaluation {
  LinkPropagation propagation;
  NliResult nli;
  LinkResult result;
};

/// propagate_link -> NLI on the first span -> SNR budget and throughput.
LinkEvaluation evaluate_link(const ScenarioConfig& scenario, int threads = 1);

}  // namespace hybridlink
