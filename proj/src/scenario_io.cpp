#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hybridlink/errors.hpp"
#include "hybridlink/link_config.hpp"
#include "hybridlink/units.hpp"

namespace hybridlink {

namespace {

using nlohmann::json;

// Field access with dotted-path context in every error message.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node child(const char* key) const {
    if (!has(key)) throw ValidationError("missing field '" + join(key) + "'");
    return Node(j_.at(key), join(key));
  }

  double number(const char* key) const {
    auto c = child(key);
    if (!c.j_.is_number()) throw ValidationError("field '" + c.path_ + "' must be a number");
    return c.j_.get<double>();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  int integer(const char* key) const {
    auto c = child(key);
    if (!c.j_.is_number_integer()) throw ValidationError("field '" + c.path_ + "' must be an integer");
    return c.j_.get<int>();
  }

  int integer_or(const char* key, int fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const char* key) const {
    auto c = child(key);
    if (!c.j_.is_string()) throw ValidationError("field '" + c.path_ + "' must be a string");
    return c.j_.get<std::string>();
  }

  std::string text_or(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool boolean_or(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    auto c = child(key);
    if (!c.j_.is_boolean()) throw ValidationError("field '" + c.path_ + "' must be a boolean");
    return c.j_.get<bool>();
  }

  std::vector<Node> array(const char* key) const {
    auto c = child(key);
    if (!c.j_.is_array()) throw ValidationError("field '" + c.path_ + "' must be an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < c.j_.size(); ++i) out.emplace_back(c.j_[i], c.path_ + "[" + std::to_string(i) + "]");
    return out;
  }

  const std::string& path() const { return path_; }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

PumpDirection parse_direction(const Node& n) {
  const auto d = n.text_or("direction", "backward");
  if (d == "backward") return PumpDirection::backward;
  if (d == "forward") return PumpDirection::forward;
  throw ValidationError("field '" + n.path() + ".direction' must be forward|backward");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  const Node root(doc, "");
  ScenarioConfig s;

  const auto ch = root.child("channels");
  s.grid = build_channel_grid(ch.number("center_wavelength_nm") * 1e-9, ch.integer("count"),
                              ch.number("symbol_rate_gbd") * 1e9, dbm_to_watt(ch.number("total_launch_power_dbm")));

  const auto fb = root.child("fibre");
  s.fibre.span_length_m = fb.number("span_length_km") * 1e3;
  s.fibre.attenuation_per_m = load_attenuation_table(base_dir / fb.text("attenuation_table"));
  s.fibre.raman_gain_per_w_per_m = load_raman_gain_table(base_dir / fb.text("raman_gain_table"));
  s.fibre.dispersion_s_per_m2 = fb.number("dispersion_ps_nm_km") * 1e-6;
  s.fibre.dispersion_slope_s_per_m3 = fb.number("dispersion_slope_ps_nm2_km") * 1e3;
  s.fibre.gamma_per_w_per_m = fb.number("gamma_per_w_km") * 1e-3;
  s.fibre.effective_area_m2 = fb.number("effective_area_um2") * 1e-12;
  s.fibre.reference_wavelength_m = fb.number_or("reference_wavelength_nm", 1550.0) * 1e-9;

  if (root.has("pump_limits")) {
    const auto pl = root.child("pump_limits");
    s.pump_limits.max_power_w = pl.number_or("max_power_mw", 500.0) * 1e-3;
    s.pump_limits.band_low_m = pl.number_or("band_low_nm", 1470.0) * 1e-9;
    s.pump_limits.band_high_m = pl.number_or("band_high_nm", 1520.0) * 1e-9;
  }
  if (root.has("pumps")) {
    for (const auto& p : root.array("pumps")) {
      PumpSpec pump;
      pump.wavelength_m = p.number("wavelength_nm") * 1e-9;
      pump.power_w = p.number("power_mw") * 1e-3;
      pump.direction = parse_direction(p);
      s.pumps.push_back(pump);
    }
  }

  const auto amp = root.child("amplifier");
  for (const auto& b : amp.array("bands")) {
    AmplifierBand band;
    // Wavelength edges swap order in frequency.
    band.f_low_hz = wavelength_to_frequency(b.number("high_nm") * 1e-9);
    band.f_high_hz = wavelength_to_frequency(b.number("low_nm") * 1e-9);
    band.noise_figure_db = b.number("noise_figure_db");
    s.amplifier.bands.push_back(band);
  }
  s.amplifier.temperature_k = amp.number_or("temperature_k", 300.0);

  s.n_spans = root.child("link").integer("n_spans");

  if (root.has("nli")) {
    const auto n = root.child("nli");
    s.nli.quadrature_points_per_axis = n.integer_or("quadrature_points_per_axis", s.nli.quadrature_points_per_axis);
    s.nli.channel_subsampling = n.integer_or("channel_subsampling", s.nli.channel_subsampling);
    s.nli.z_segments = n.integer_or("z_segments", s.nli.z_segments);
    s.nli.accumulation = parse_accumulation_mode(n.text_or("accumulation", "incoherent"));
    s.nli.coherence_epsilon = n.number_or("coherence_epsilon", 0.0);
  }
  if (root.has("solver")) {
    const auto v = root.child("solver");
    s.solver.max_step_m = v.number_or("max_step_m", s.solver.max_step_m);
    s.solver.bvp_tolerance_db = v.number_or("bvp_tolerance_db", s.solver.bvp_tolerance_db);
    s.solver.bvp_max_iterations = v.integer_or("bvp_max_iterations", s.solver.bvp_max_iterations);
    s.solver.bvp_damping = v.number_or("bvp_damping", s.solver.bvp_damping);
    s.solver.raman_convention = parse_raman_convention(v.text_or("raman_convention", "as-printed"));
    s.solver.span_mode = parse_span_mode(v.text_or("span_mode", "chain"));
    s.solver.ase_in_signal_equation = v.boolean_or("ase_in_signal_equation", true);
    s.solver.spontaneous_on_depletion = v.boolean_or("spontaneous_on_depletion", false);
  }

  validate(s);
  return s;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace hybridlink
