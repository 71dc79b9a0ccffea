#include "hybridlink/pso_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hybridlink/errors.hpp"
#include "hybridlink/parallel.hpp"
#include "hybridlink/snr_budget.hpp"
#include "hybridlink/units.hpp"

namespace hybridlink {

void validate(const PsoParams& p) {
  if (p.n_particles < 2) throw ValidationError("pso.n_particles must be at least 2");
  if (p.max_iterations < 1) throw ValidationError("pso.max_iterations must be at least 1");
  if (!(p.inertia > 0.0) || !(p.cognitive > 0.0) || !(p.social > 0.0))
    throw ValidationError("pso coefficients (inertia, cognitive, social) must be positive");
  if (!(p.velocity_clamp_fraction > 0.0)) throw ValidationError("pso.velocity_clamp_fraction must be positive");
}

void validate(const Bounds& b) {
  if (b.lo.empty()) throw ValidationError("bounds: empty");
  if (b.lo.size() != b.hi.size()) throw ValidationError("bounds: lo and hi differ in length");
  for (std::size_t d = 0; d < b.lo.size(); ++d) {
    if (!std::isfinite(b.lo[d]) || !std::isfinite(b.hi[d]) || !(b.lo[d] <= b.hi[d])) {
      std::ostringstream os;
      os << "bounds[" << d << "]: need finite lo <= hi (got " << b.lo[d] << ", " << b.hi[d] << ")";
      throw ValidationError(os.str());
    }
  }
}

namespace {

struct Particle {
  std::mt19937_64 rng;
  std::vector<double> x, v, best_x;
  double cost = kWorstCost;
  double best_cost = kWorstCost;
};

double guarded(const CostFunction& f, std::span<const double> x, std::string& note) {
  double c;
  try {
    c = f(x);
  } catch (const std::exception& e) {
    note = e.what();
    return kWorstCost;
  }
  if (!std::isfinite(c)) {
    note = "non-finite cost";
    return kWorstCost;
  }
  return c;
}

}  // namespace

PsoResult maximize(const CostFunction& cost, const Bounds& bounds, const PsoParams& params) {
  validate(params);
  validate(bounds);
  const std::size_t dim = bounds.size();
  const auto n = static_cast<std::size_t>(params.n_particles);

  std::vector<double> vmax(dim);
  for (std::size_t d = 0; d < dim; ++d) vmax[d] = params.velocity_clamp_fraction * (bounds.hi[d] - bounds.lo[d]);

  std::vector<Particle> swarm(n);
  const auto seed_lo = static_cast<std::uint32_t>(params.seed & 0xffffffffu);
  const auto seed_hi = static_cast<std::uint32_t>(params.seed >> 32);
  for (std::size_t i = 0; i < n; ++i) {
    std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(i)};
    auto& p = swarm[i];
    p.rng.seed(seq);
    p.x.resize(dim);
    p.v.resize(dim);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t d = 0; d < dim; ++d) {
      const double range = bounds.hi[d] - bounds.lo[d];
      p.x[d] = bounds.lo[d] + u(p.rng) * range;
      // Half the distance to a second uniform point.
      const double target = bounds.lo[d] + u(p.rng) * range;
      p.v[d] = std::clamp(0.5 * (target - p.x[d]), -vmax[d], vmax[d]);
    }
  }

  PsoResult result;
  std::vector<std::string> notes(n);
  std::vector<double> gbest_x;
  double gbest = kWorstCost;

  auto evaluate_all = [&](int iteration) {
    parallel_for(n, params.threads, [&](std::size_t i) {
      notes[i].clear();
      swarm[i].cost = guarded(cost, swarm[i].x, notes[i]);
    });
    result.evaluations += static_cast<long>(n);
    // Sequential reduction keeps ties and logging order deterministic.
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = swarm[i];
      if (!notes[i].empty()) {
        std::ostringstream os;
        os << "iteration " << iteration << " particle " << i << ": " << notes[i];
        result.log.push_back(os.str());
      }
      if (p.best_x.empty() || p.cost > p.best_cost) {
        p.best_cost = p.cost;
        p.best_x = p.x;
      }
      if (gbest_x.empty() || p.best_cost > gbest) {
        gbest = p.best_cost;
        gbest_x = p.best_x;
      }
    }
    result.trace.push_back({iteration, gbest, gbest_x});
  };

  evaluate_all(1);
  for (int it = 2; it <= params.max_iterations; ++it) {
    for (auto& p : swarm) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t d = 0; d < dim; ++d) {
        const double r1 = u(p.rng);
        const double r2 = u(p.rng);
        double v = params.inertia * p.v[d] + params.cognitive * r1 * (p.best_x[d] - p.x[d]) +
                   params.social * r2 * (gbest_x[d] - p.x[d]);
        v = std::clamp(v, -vmax[d], vmax[d]);
        double x = p.x[d] + v;
        if (x < bounds.lo[d] || x > bounds.hi[d]) {
          x = std::clamp(x, bounds.lo[d], bounds.hi[d]);
          v = 0.0;
        }
        p.x[d] = x;
        p.v[d] = v;
      }
    }
    evaluate_all(it);
  }

  result.best_cost = gbest;
  result.best_position = gbest_x;
  return result;
}

std::string_view to_string(Encoding e) {
  return e == Encoding::powers_only ? "powers-only" : "powers-and-wavelengths";
}

Encoding parse_encoding(std::string_view s) {
  if (s == "powers-only") return Encoding::powers_only;
  if (s == "powers-and-wavelengths") return Encoding::powers_and_wavelengths;
  throw ValidationError("encoding must be powers-only|powers-and-wavelengths, got '" + std::string(s) + "'");
}

std::size_t OptimizationProblem::dimension() const {
  return encoding == Encoding::powers_only ? n_pumps() + 1 : 2 * n_pumps() + 1;
}

OptimizationProblem make_amplifier_problem(const ScenarioConfig& scenario_template, const ProblemOptions& options) {
  OptimizationProblem p;
  p.encoding = options.encoding;
  p.fidelity = options.fidelity;
  p.scenario_template = scenario_template;
  p.preset_wavelengths_m = options.preset_wavelengths_m;
  if (!scenario_template.pumps.empty()) p.pump_direction = scenario_template.pumps.front().direction;

  const auto& lim = scenario_template.pump_limits;
  for (std::size_t k = 0; k < p.n_pumps(); ++k) {
    p.bounds.lo.push_back(0.0);
    p.bounds.hi.push_back(lim.max_power_w);
  }
  if (p.encoding == Encoding::powers_and_wavelengths) {
    for (std::size_t k = 0; k < p.n_pumps(); ++k) {
      p.bounds.lo.push_back(lim.band_low_m * 1e9);
      p.bounds.hi.push_back(lim.band_high_m * 1e9);
    }
  }
  p.bounds.lo.push_back(options.launch_low_dbm);
  p.bounds.hi.push_back(options.launch_high_dbm);
  validate(p);
  return p;
}

void validate(const OptimizationProblem& p) {
  if (p.preset_wavelengths_m.empty()) throw ValidationError("optimizer: at least one pump wavelength preset is required");
  validate(p.bounds);
  if (p.bounds.size() != p.dimension()) {
    std::ostringstream os;
    os << "optimizer: encoding " << to_string(p.encoding) << " with " << p.n_pumps() << " pumps needs " << p.dimension()
       << " bounds, got " << p.bounds.size();
    throw ValidationError(os.str());
  }
  const auto& lim = p.scenario_template.pump_limits;
  for (std::size_t k = 0; k < p.n_pumps(); ++k) {
    const double w = p.preset_wavelengths_m[k];
    if (w < lim.band_low_m - 1e-15 || w > lim.band_high_m + 1e-15) {
      std::ostringstream os;
      os << "optimizer.pump_wavelengths_nm[" << k << "] = " << w * 1e9 << " lies outside the pump band";
      throw ValidationError(os.str());
    }
  }
}

ScenarioConfig decode(const OptimizationProblem& problem, std::span<const double> x) {
  if (x.size() != problem.dimension()) throw ValidationError("decode: decision vector has the wrong length");
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (!(x[d] >= problem.bounds.lo[d] && x[d] <= problem.bounds.hi[d])) {
      std::ostringstream os;
      os << "decode: x[" << d << "] = " << x[d] << " outside [" << problem.bounds.lo[d] << ", " << problem.bounds.hi[d] << "]";
      throw RangeError(os.str());
    }
  }
  ScenarioConfig s = with_fidelity(problem.scenario_template, problem.fidelity);
  const std::size_t n = problem.n_pumps();
  s.pumps.clear();
  for (std::size_t k = 0; k < n; ++k) {
    PumpSpec pump;
    pump.power_w = x[k];
    pump.wavelength_m =
        problem.encoding == Encoding::powers_only ? problem.preset_wavelengths_m[k] : x[n + k] * 1e-9;
    pump.direction = problem.pump_direction;
    s.pumps.push_back(pump);
  }
  s.grid = with_total_power(s.grid, dbm_to_watt(x.back()));
  return s;
}

CandidateEvaluation evaluate_candidate(const OptimizationProblem& problem, std::span<const double> x, int threads) {
  CandidateEvaluation out;
  try {
    const ScenarioConfig s = decode(problem, x);
    const double t = evaluate_link(s, threads).result.total_throughput_bps;
    if (!std::isfinite(t)) {
      out.diagnostic = "non-finite throughput";
      return out;
    }
    out.throughput_bps = t;
    out.ok = true;
  } catch (const std::exception& e) {
    out.diagnostic = e.what();
  }
  return out;
}

CostFunction throughput_cost(const OptimizationProblem& problem, int nli_threads) {
  return [&problem, nli_threads](std::span<const double> x) {
    auto r = evaluate_candidate(problem, x, nli_threads);
    if (!r.ok) throw NumericalError(r.diagnostic);
    return r.throughput_bps;
  };
}

namespace {

using nlohmann::json;

double number_field(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(std::string("field 'optimizer.") + key + "' must be a number");
  return j.at(key).get<double>();
}

int integer_field(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ValidationError(std::string("field 'optimizer.") + key + "' must be an integer");
  return j.at(key).get<int>();
}

}  // namespace

OptimizerConfig parse_optimizer_config(const std::string& text, const std::filesystem::path& base_dir) {
  OptimizerConfig cfg;
  cfg.scenario = parse_scenario(text, base_dir);
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.contains("optimizer")) return cfg;
  const json& o = root.at("optimizer");
  if (!o.is_object()) throw ValidationError("field 'optimizer' must be an object");

  auto& pr = cfg.problem;
  if (o.contains("encoding")) {
    if (!o.at("encoding").is_string()) throw ValidationError("field 'optimizer.encoding' must be a string");
    pr.encoding = parse_encoding(o.at("encoding").get<std::string>());
  }
  if (o.contains("fidelity")) {
    if (!o.at("fidelity").is_string()) throw ValidationError("field 'optimizer.fidelity' must be a string");
    pr.fidelity = parse_fidelity(o.at("fidelity").get<std::string>());
  }
  pr.launch_low_dbm = number_field(o, "launch_low_dbm", pr.launch_low_dbm);
  pr.launch_high_dbm = number_field(o, "launch_high_dbm", pr.launch_high_dbm);
  if (o.contains("pump_wavelengths_nm")) {
    const json& w = o.at("pump_wavelengths_nm");
    if (!w.is_array()) throw ValidationError("field 'optimizer.pump_wavelengths_nm' must be an array");
    pr.preset_wavelengths_m.clear();
    for (const auto& v : w) {
      if (!v.is_number()) throw ValidationError("field 'optimizer.pump_wavelengths_nm' must hold numbers");
      pr.preset_wavelengths_m.push_back(v.get<double>() * 1e-9);
    }
  }

  auto& ps = cfg.pso;
  ps.n_particles = integer_field(o, "particles", ps.n_particles);
  ps.max_iterations = integer_field(o, "iterations", ps.max_iterations);
  ps.inertia = number_field(o, "inertia", ps.inertia);
  ps.cognitive = number_field(o, "cognitive", ps.cognitive);
  ps.social = number_field(o, "social", ps.social);
  ps.velocity_clamp_fraction = number_field(o, "velocity_clamp_fraction", ps.velocity_clamp_fraction);
  if (o.contains("seed")) {
    if (!o.at("seed").is_number_unsigned()) throw ValidationError("field 'optimizer.seed' must be a non-negative integer");
    ps.seed = o.at("seed").get<std::uint64_t>();
  }
  if (pr.launch_low_dbm > pr.launch_high_dbm) throw ValidationError("optimizer: launch_low_dbm exceeds launch_high_dbm");
  validate(ps);
  return cfg;
}

OptimizerConfig load_optimizer_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_optimizer_config(ss.str(), path.parent_path());
}

}  // namespace hybridlink
