#include "hybridlink/snr_budget.hpp"

#include <cmath>

#include "hybridlink/errors.hpp"
#include "hybridlink/units.hpp"

namespace hybridlink {

double edfa_gain(double launch_power_w, double output_power_w) {
  if (!(output_power_w > 0.0)) throw NumericalError("edfa_gain: span output power is zero (total extinction)");
  return launch_power_w / output_power_w;
}

std::vector<double> edfa_gain(const SpanSolution& span, const ChannelGrid& grid) {
  std::vector<double> g(grid.size());
  const auto last = static_cast<Eigen::Index>(span.n_z() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    g[i] = edfa_gain(span.signal_w(r, 0), span.signal_w(r, last));
  }
  return g;
}

double edfa_ase(double gain, double nf_db, double frequency_hz, double bandwidth_hz) {
  if (gain < 1.0) throw ValidationError("edfa_ase: gain below 1 (attenuating amplifier)");
  const double n_sp = db_to_linear(nf_db) / 2.0;
  return 2.0 * (gain - 1.0) * n_sp * kPlanck * frequency_hz * bandwidth_hz;
}

double hybrid_ase(double gain, double raman_ase_w, double edfa_ase_w) {
  if (gain < 0.0 || raman_ase_w < 0.0 || edfa_ase_w < 0.0) throw ValidationError("hybrid_ase: negative input");
  return gain * raman_ase_w + edfa_ase_w;
}

double snr_total(double snr_nli, double snr_ase) {
  const double inv = (std::isinf(snr_nli) ? 0.0 : 1.0 / snr_nli) + (std::isinf(snr_ase) ? 0.0 : 1.0 / snr_ase);
  return inv == 0.0 ? kNoNli : 1.0 / inv;
}

Throughput throughput(std::span<const double> snrs, double symbol_rate_hz) {
  Throughput t;
  t.spectral_efficiency.reserve(snrs.size());
  double sum = 0.0;
  for (double snr : snrs) {
    if (snr < 0.0) throw ValidationError("throughput: negative SNR");
    const double se = 2.0 * std::log2(1.0 + snr);
    t.spectral_efficiency.push_back(se);
    sum += se;
  }
  t.total_bps = symbol_rate_hz * sum;
  return t;
}

LinkResult assemble_link_result(const ChannelGrid& grid, std::span<const double> total_ase_w, const NliResult& nli) {
  const std::size_t n = grid.size();
  if (total_ase_w.size() != n || nli.per_channel_snr_nli.size() != n)
    throw ValidationError("assemble_link_result: per-channel inputs do not match the grid");
  LinkResult out;
  out.per_channel.resize(n);
  std::vector<double> snrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = out.per_channel[i];
    c.frequency_hz = grid.frequencies_hz[i];
    c.launch_power_w = grid.launch_power_w[i];
    c.nli_power_w = nli.per_channel_nli_power_w[i];
    c.ase_power_w = total_ase_w[i];
    c.snr_nli = nli.per_channel_snr_nli[i];
    c.snr_ase = total_ase_w[i] > 0.0 ? c.launch_power_w / total_ase_w[i] : kNoNli;
    c.snr_total = snr_total(c.snr_nli, c.snr_ase);
    snrs[i] = c.snr_total;
  }
  const auto t = throughput(snrs, grid.channel_bandwidth_hz);
  for (std::size_t i = 0; i < n; ++i) out.per_channel[i].spectral_efficiency = t.spectral_efficiency[i];
  out.total_throughput_bps = t.total_bps;
  out.total_launch_power_w = grid.total_power_w();
  return out;
}

LinkEvaluation evaluate_link(const ScenarioConfig& scenario, int threads) {
  LinkEvaluation ev;
  ev.propagation = propagate_link(scenario);
  ev.nli = compute_nli(scenario.grid, scenario.fibre, ev.propagation.spans.front(), scenario.n_spans, scenario.nli,
                       threads);
  ev.result = assemble_link_result(scenario.grid, ev.propagation.accumulated_ase_w, ev.nli);
  return ev;
}

}  // namespace hybridlink
