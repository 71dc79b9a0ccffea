#include "hybridlink/reporting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hybridlink/errors.hpp"
#include "hybridlink/parallel.hpp"
#include "hybridlink/units.hpp"

#ifndef HYBRIDLINK_VERSION
#define HYBRIDLINK_VERSION "0.0.0"
#endif

namespace hybridlink {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::simulate:
      return "simulate";
    case Command::optimize:
      return "optimize";
    case Command::compare:
      return "compare";
  }
  return "?";
}

std::string_view tool_version() { return HYBRIDLINK_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out.precision(12);
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

double db_or_inf(double linear) { return std::isinf(linear) ? linear : linear_to_db(linear); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json manifest_json(const RunManifest& m, double wall_time_s) {
  json j;
  j["command"] = to_string(m.command);
  j["tool_version"] = tool_version();
  j["timestamp"] = m.timestamp;
  json configs = json::array();
  for (const auto& p : m.config_paths) {
    json c;
    c["path"] = fs::absolute(p).string();
    c["text"] = read_text(p);
    configs.push_back(std::move(c));
  }
  j["configs"] = std::move(configs);
  j["output_directory"] = fs::absolute(m.output_directory).string();
  j["seed"] = m.seed;
  j["fidelity"] = m.fidelity ? json(to_string(*m.fidelity)) : json("as-configured");
  if (m.command == Command::optimize) j["rescore_fidelity"] = to_string(m.rescore_fidelity);
  j["threads"] = m.threads;
  j["trace_power_evolution"] = m.trace_power_evolution;
  j["nli_breakdown"] = m.nli_breakdown;
  if (m.iterations) j["iterations"] = *m.iterations;
  if (m.particles) j["particles"] = *m.particles;
  j["wall_time_s"] = wall_time_s;
  return j;
}

ScenarioConfig load_for_run(const fs::path& path, const std::optional<Fidelity>& fidelity) {
  ScenarioConfig s = load_scenario(path);
  return fidelity ? with_fidelity(std::move(s), *fidelity) : s;
}

json summary_json(const ScenarioConfig& s, const LinkEvaluation& ev) {
  const auto& r = ev.result;
  double min_snr = std::numeric_limits<double>::infinity();
  double max_snr = -min_snr;
  double mean_se = 0.0;
  for (const auto& c : r.per_channel) {
    min_snr = std::min(min_snr, c.snr_total);
    max_snr = std::max(max_snr, c.snr_total);
    mean_se += c.spectral_efficiency;
  }
  mean_se /= static_cast<double>(r.per_channel.size());

  json j;
  j["throughput_tbps"] = r.total_throughput_bps / 1e12;
  j["throughput_bps"] = r.total_throughput_bps;
  j["mean_spectral_efficiency_bit_per_symbol"] = mean_se;
  j["min_snr_total_db"] = linear_to_db(min_snr);
  j["max_snr_total_db"] = linear_to_db(max_snr);
  j["total_launch_dbm"] = watt_to_dbm(r.total_launch_power_w);
  j["n_channels"] = s.grid.size();
  j["symbol_rate_gbd"] = s.grid.channel_bandwidth_hz / 1e9;
  j["n_spans"] = s.n_spans;
  j["span_length_km"] = s.fibre.span_length_m / 1e3;
  json pumps = json::array();
  for (const auto& p : s.pumps) {
    pumps.push_back({{"wavelength_nm", p.wavelength_m * 1e9},
                     {"power_mw", p.power_w * 1e3},
                     {"direction", p.direction == PumpDirection::backward ? "backward" : "forward"}});
  }
  j["pumps"] = std::move(pumps);
  j["span_mode"] = to_string(s.solver.span_mode);
  j["raman_convention"] = to_string(s.solver.raman_convention);
  j["nli_accumulation"] = to_string(s.nli.accumulation);
  j["bvp_iterations_first_span"] = ev.propagation.spans.front().bvp_iterations;
  return j;
}

void write_simulate_outputs(const fs::path& dir, const RunManifest& m, const ScenarioConfig& s,
                            const LinkEvaluation& ev) {
  write_snr_csv(dir / "snr.csv", ev.result);
  write_gain_csv(dir / "gain.csv", gain_spectrum(s, ev));
  write_json(dir / "summary.json", summary_json(s, ev));
  if (m.trace_power_evolution) write_power_evolution_csv(dir / "power_evolution.csv", s, ev.propagation.spans.front());
  if (m.nli_breakdown) write_nli_csv(dir / "nli.csv", s, ev);
}

SimulateReport simulate_one(const fs::path& config, const RunManifest& m, int threads) {
  SimulateReport rep;
  const auto t0 = Clock::now();
  rep.scenario = load_for_run(config, m.fidelity);
  rep.evaluation = evaluate_link(rep.scenario, threads);
  rep.wall_time_s = seconds_since(t0);
  return rep;
}

}  // namespace

GainSpectrum gain_spectrum(const ScenarioConfig& s, const LinkEvaluation& ev) {
  const auto& span = ev.propagation.spans.front();
  const std::size_t n = s.grid.size();
  const auto last = static_cast<Eigen::Index>(span.n_z() - 1);

  std::vector<double> off_out(n);
  const bool any_pump = std::any_of(s.pumps.begin(), s.pumps.end(), [](const PumpSpec& p) { return p.power_w > 0.0; });
  if (any_pump) {
    const std::vector<double> no_ase(n, 0.0);
    const SpanSolution off = solve_span(s.grid, s.fibre, {}, no_ase, s.solver, s.amplifier.temperature_k);
    for (std::size_t i = 0; i < n; ++i) off_out[i] = off.signal_w(static_cast<Eigen::Index>(i), last);
  }

  GainSpectrum g;
  g.frequency_hz = s.grid.frequencies_hz;
  for (std::size_t i = 0; i < n; ++i) {
    const double on = span.signal_w(static_cast<Eigen::Index>(i), last);
    const double raman = any_pump ? linear_to_db(on / off_out[i]) : 0.0;
    const double edfa = linear_to_db(ev.propagation.edfa_gain[i]);
    g.raman_on_off_db.push_back(raman);
    g.edfa_db.push_back(edfa);
    g.total_db.push_back(raman + edfa);
  }
  return g;
}

void write_snr_csv(const fs::path& path, const LinkResult& r) {
  auto out = open_output(path);
  out << "channel,frequency_thz,wavelength_nm,launch_power_dbm,snr_nli_db,snr_ase_db,snr_total_db,"
         "se_bit_per_symbol\n";
  for (std::size_t i = 0; i < r.per_channel.size(); ++i) {
    const auto& c = r.per_channel[i];
    out << i << ',' << c.frequency_hz / 1e12 << ',' << frequency_to_wavelength(c.frequency_hz) * 1e9 << ','
        << watt_to_dbm(c.launch_power_w) << ',' << db_or_inf(c.snr_nli) << ',' << db_or_inf(c.snr_ase) << ','
        << db_or_inf(c.snr_total) << ',' << c.spectral_efficiency << '\n';
  }
}

void write_gain_csv(const fs::path& path, const GainSpectrum& g) {
  auto out = open_output(path);
  out << "channel,frequency_thz,wavelength_nm,raman_on_off_db,edfa_db,total_db\n";
  for (std::size_t i = 0; i < g.frequency_hz.size(); ++i) {
    out << i << ',' << g.frequency_hz[i] / 1e12 << ',' << frequency_to_wavelength(g.frequency_hz[i]) * 1e9 << ','
        << g.raman_on_off_db[i] << ',' << g.edfa_db[i] << ',' << g.total_db[i] << '\n';
  }
}

// One row per z sample; one column per wave, in W.
void write_power_evolution_csv(const fs::path& path, const ScenarioConfig& s, const SpanSolution& span) {
  auto out = open_output(path);
  const std::size_t n = s.grid.size();
  out << "z_km";
  for (std::size_t i = 0; i < n; ++i) out << ",signal_" << i << "_w";
  for (std::size_t p = 0; p < s.pumps.size(); ++p) out << ",pump_" << p << "_w";
  for (std::size_t i = 0; i < n; ++i) out << ",ase_" << i << "_w";
  out << '\n';
  for (std::size_t k = 0; k < span.n_z(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out << span.z_m[k] / 1e3;
    for (std::size_t i = 0; i < n; ++i) out << ',' << span.signal_w(static_cast<Eigen::Index>(i), col);
    for (std::size_t p = 0; p < s.pumps.size(); ++p) out << ',' << span.pump_w(static_cast<Eigen::Index>(p), col);
    for (std::size_t i = 0; i < n; ++i) out << ',' << span.ase_w(static_cast<Eigen::Index>(i), col);
    out << '\n';
  }
}

void write_nli_csv(const fs::path& path, const ScenarioConfig& s, const LinkEvaluation& ev) {
  auto out = open_output(path);
  out << "channel_index,wavelength_nm,nli_power_dbm,snr_nli_db,frequency_thz,nli_per_span_w,eta_per_span_per_w2\n";
  const double per_span_scale = accumulate_nli(1.0, s.n_spans, s.nli);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double total = ev.nli.per_channel_nli_power_w[i];
    const double per_span = total / per_span_scale;
    const double p = s.grid.launch_power_w[i];
    out << i << ',' << frequency_to_wavelength(s.grid.frequencies_hz[i]) * 1e9 << ',' << watt_to_dbm(total) << ','
        << db_or_inf(ev.nli.per_channel_snr_nli[i]) << ',' << s.grid.frequencies_hz[i] / 1e12 << ',' << per_span << ','
        << per_span / (p * p * p) << '\n';
  }
}

void write_trace_csv(const fs::path& path, const PsoResult& r) {
  auto out = open_output(path);
  out.precision(17);
  out << "iteration,best_cost_tbps";
  const std::size_t dim = r.trace.empty() ? 0 : r.trace.front().best_position.size();
  for (std::size_t d = 0; d < dim; ++d) out << ",x" << d;
  out << '\n';
  for (const auto& t : r.trace) {
    out << t.iteration << ',' << t.best_cost / 1e12;
    for (double x : t.best_position) out << ',' << x;
    out << '\n';
  }
}

SimulateReport run_simulate(RunManifest m) {
  if (m.config_paths.size() != 1) throw ValidationError("simulate needs exactly one config");
  if (m.timestamp.empty()) m.timestamp = utc_timestamp();
  ensure_directory(m.output_directory);
  const int threads = resolve_thread_count(m.threads);
  SimulateReport rep = simulate_one(m.config_paths.front(), m, threads);
  write_simulate_outputs(m.output_directory, m, rep.scenario, rep.evaluation);
  write_json(m.output_directory / "manifest.json", manifest_json(m, rep.wall_time_s));
  return rep;
}

OptimizeReport run_optimize(RunManifest m) {
  if (m.config_paths.size() != 1) throw ValidationError("optimize needs exactly one config");
  if (m.timestamp.empty()) m.timestamp = utc_timestamp();
  ensure_directory(m.output_directory);
  const auto t0 = Clock::now();

  OptimizerConfig cfg = load_optimizer_config(m.config_paths.front());
  if (m.fidelity) cfg.problem.fidelity = *m.fidelity;
  if (m.iterations) cfg.pso.max_iterations = *m.iterations;
  if (m.particles) cfg.pso.n_particles = *m.particles;
  cfg.pso.seed = m.seed;
  cfg.pso.threads = resolve_thread_count(m.threads);
  validate(cfg.pso);

  OptimizeReport rep;
  rep.problem = make_amplifier_problem(cfg.scenario, cfg.problem);
  rep.pso = maximize(throughput_cost(rep.problem, 1), rep.problem.bounds, cfg.pso);
  if (rep.pso.best_cost == kWorstCost) throw NumericalError("optimize: every candidate evaluation failed");
  rep.search_throughput_bps = rep.pso.best_cost;

  OptimizationProblem rescoring = rep.problem;
  rescoring.fidelity = m.rescore_fidelity;
  const ScenarioConfig best = decode(rescoring, rep.pso.best_position);
  const LinkEvaluation best_eval = evaluate_link(best, cfg.pso.threads);
  rep.rescored_throughput_bps = best_eval.result.total_throughput_bps;
  rep.wall_time_s = seconds_since(t0);

  write_trace_csv(m.output_directory / "trace.csv", rep.pso);

  json j;
  j["encoding"] = to_string(rep.problem.encoding);
  j["search_fidelity"] = to_string(rep.problem.fidelity);
  j["rescore_fidelity"] = to_string(m.rescore_fidelity);
  j["best_vector"] = rep.pso.best_position;
  json pumps = json::array();
  for (const auto& p : best.pumps) pumps.push_back({{"wavelength_nm", p.wavelength_m * 1e9}, {"power_mw", p.power_w * 1e3}});
  j["pumps"] = std::move(pumps);
  j["total_launch_dbm"] = rep.pso.best_position.back();
  j["throughput_search_tbps"] = rep.search_throughput_bps / 1e12;
  j["throughput_rescored_tbps"] = rep.rescored_throughput_bps / 1e12;
  j["particles"] = cfg.pso.n_particles;
  j["iterations"] = cfg.pso.max_iterations;
  j["seed"] = cfg.pso.seed;
  j["evaluations"] = rep.pso.evaluations;
  j["penalized"] = rep.pso.log;
  j["wall_time_s"] = rep.wall_time_s;
  write_json(m.output_directory / "result.json", j);

  const fs::path best_dir = m.output_directory / "best";
  ensure_directory(best_dir);
  write_simulate_outputs(best_dir, m, best, best_eval);
  write_json(m.output_directory / "manifest.json", manifest_json(m, rep.wall_time_s));
  return rep;
}

CompareReport run_compare(RunManifest m) {
  if (m.config_paths.size() != 2) throw ValidationError("compare needs exactly two configs");
  if (m.timestamp.empty()) m.timestamp = utc_timestamp();
  ensure_directory(m.output_directory);
  const int threads = resolve_thread_count(m.threads);

  CompareReport rep;
  rep.a = simulate_one(m.config_paths[0], m, threads);
  rep.b = simulate_one(m.config_paths[1], m, threads);
  const auto& ra = rep.a.evaluation.result;
  const auto& rb = rep.b.evaluation.result;
  rep.delta_bps = ra.total_throughput_bps - rb.total_throughput_bps;
  rep.delta_percent = 100.0 * rep.delta_bps / rb.total_throughput_bps;

  if (ra.per_channel.size() != rb.per_channel.size())
    throw ValidationError("compare: the two configs have different channel counts");
  {
    auto out = open_output(m.output_directory / "compare.csv");
    out << "channel,frequency_thz,wavelength_nm,snr_total_a_db,snr_total_b_db,delta_snr_db,se_a,se_b\n";
    for (std::size_t i = 0; i < ra.per_channel.size(); ++i) {
      const auto& ca = ra.per_channel[i];
      const auto& cb = rb.per_channel[i];
      out << i << ',' << ca.frequency_hz / 1e12 << ',' << frequency_to_wavelength(ca.frequency_hz) * 1e9 << ','
          << db_or_inf(ca.snr_total) << ',' << db_or_inf(cb.snr_total) << ','
          << db_or_inf(ca.snr_total) - db_or_inf(cb.snr_total) << ',' << ca.spectral_efficiency << ','
          << cb.spectral_efficiency << '\n';
    }
  }
  json j;
  j["config_a"] = fs::absolute(m.config_paths[0]).string();
  j["config_b"] = fs::absolute(m.config_paths[1]).string();
  j["throughput_a_tbps"] = ra.total_throughput_bps / 1e12;
  j["throughput_b_tbps"] = rb.total_throughput_bps / 1e12;
  j["delta_tbps"] = rep.delta_bps / 1e12;
  j["delta_percent"] = rep.delta_percent;
  write_json(m.output_directory / "compare.json", j);
  write_json(m.output_directory / "manifest.json", manifest_json(m, rep.a.wall_time_s + rep.b.wall_time_s));
  return rep;
}

}  // namespace hybridlink
