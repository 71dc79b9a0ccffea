#include "hybridlink/link_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hybridlink/errors.hpp"
#include "hybridlink/units.hpp"

namespace hybridlink {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

double ChannelGrid::total_power_w() const {
  return std::accumulate(launch_power_w.begin(), launch_power_w.end(), 0.0);
}

double ChannelGrid::center_frequency_hz() const {
  return 0.5 * (frequencies_hz.front() + frequencies_hz.back());
}

ChannelGrid build_channel_grid(double center_wavelength_m, int n_channels, double symbol_rate_hz,
                               double total_power_w) {
  if (!(center_wavelength_m > 0.0)) throw ValidationError("center_wavelength must be positive");
  if (n_channels < 1) throw ValidationError("n_channels must be at least 1");
  if (!(symbol_rate_hz > 0.0)) throw ValidationError("symbol_rate must be positive");
  if (!(total_power_w > 0.0)) throw ValidationError("total_power must be positive");

  const double f_center = wavelength_to_frequency(center_wavelength_m);
  ChannelGrid grid;
  grid.channel_bandwidth_hz = symbol_rate_hz;
  grid.frequencies_hz.resize(n_channels);
  const double mid = 0.5 * (n_channels + 1);
  for (int i = 1; i <= n_channels; ++i) {
    grid.frequencies_hz[i - 1] = f_center + (i - mid) * symbol_rate_hz;
  }
  grid.launch_power_w.assign(n_channels, total_power_w / n_channels);
  return grid;
}

ChannelGrid with_total_power(ChannelGrid grid, double total_power_w) {
  if (!(total_power_w > 0.0)) throw ValidationError("total_power must be positive");
  std::fill(grid.launch_power_w.begin(), grid.launch_power_w.end(),
            total_power_w / static_cast<double>(grid.size()));
  return grid;
}

void validate(const ChannelGrid& grid) {
  if (grid.frequencies_hz.empty()) throw ValidationError("grid: no channels");
  if (grid.launch_power_w.size() != grid.frequencies_hz.size())
    throw ValidationError("grid: launch power count does not match channel count");
  if (!(grid.channel_bandwidth_hz > 0.0)) throw ValidationError("grid.channel_bandwidth must be positive");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid.launch_power_w[i] > 0.0))
      throw ValidationError("grid.launch_power[" + std::to_string(i) + "] must be positive");
    if (i > 0) {
      const double spacing = grid.frequencies_hz[i] - grid.frequencies_hz[i - 1];
      if (!(spacing > 0.0)) throw ValidationError("grid.frequencies must be strictly ascending");
      if (std::abs(spacing - grid.channel_bandwidth_hz) > 1e-9 * grid.channel_bandwidth_hz)
        throw ValidationError("grid: spacing at channel " + std::to_string(i) +
                              " differs from the channel bandwidth (not Nyquist-spaced)");
    }
  }
}

SampledCurve::SampledCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) throw ValidationError("table: x and y lengths differ");
  if (x_.size() < 2) throw ValidationError("table: at least two samples required");
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw ValidationError("table: abscissa must be strictly ascending");
  }
}

double SampledCurve::operator()(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  if (it == x_.begin()) return y_.front();
  if (it == x_.end()) return y_.back();
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - x_[lo]) / (x_[hi] - x_[lo]);
  return y_[lo] + t * (y_[hi] - y_[lo]);
}

double attenuation_at(const FibreSpec& fibre, double frequency_hz) {
  if (!fibre.attenuation_per_m.covers(frequency_hz)) {
    throw RangeError("attenuation table does not cover " +
                     fmt_double(frequency_to_wavelength(frequency_hz) * 1e9) + " nm");
  }
  return fibre.attenuation_per_m(frequency_hz);
}

double raman_gain_at(const FibreSpec& fibre, double delta_f_hz) {
  if (delta_f_hz < 0.0) throw std::invalid_argument("raman_gain_at: negative frequency separation");
  const auto& curve = fibre.raman_gain_per_w_per_m;
  if (delta_f_hz == 0.0 || curve.empty() || delta_f_hz > curve.x_max()) return 0.0;
  if (delta_f_hz < curve.x_min()) {
    // Linear ramp from the origin to the first sample.
    return curve.y().front() * delta_f_hz / curve.x_min();
  }
  return curve(delta_f_hz);
}

double beta2_at_reference(const FibreSpec& fibre) {
  const double lambda = fibre.reference_wavelength_m;
  return -fibre.dispersion_s_per_m2 * lambda * lambda / (2.0 * M_PI * kSpeedOfLight);
}

double beta3_at_reference(const FibreSpec& fibre) {
  const double lambda = fibre.reference_wavelength_m;
  const double k = lambda / (2.0 * M_PI * kSpeedOfLight);
  return k * k * (lambda * lambda * fibre.dispersion_slope_s_per_m3 + 2.0 * lambda * fibre.dispersion_s_per_m2);
}

void validate(const FibreSpec& fibre) {
  if (!(fibre.span_length_m > 0.0)) throw ValidationError("fibre.span_length must be positive");
  if (fibre.attenuation_per_m.empty()) throw ValidationError("fibre.attenuation_table is empty");
  for (std::size_t i = 0; i < fibre.attenuation_per_m.y().size(); ++i) {
    if (!(fibre.attenuation_per_m.y()[i] > 0.0))
      throw ValidationError("fibre.attenuation_table: sample " + std::to_string(i) + " must be positive");
  }
  const double f_lo = wavelength_to_frequency(1630e-9);
  const double f_hi = wavelength_to_frequency(1450e-9);
  // Allow a relative slack for the nm -> Hz round trip of the table edges.
  if (fibre.attenuation_per_m.x_min() > f_lo * (1 + 1e-12) || fibre.attenuation_per_m.x_max() < f_hi * (1 - 1e-12))
    throw ValidationError("fibre.attenuation_table must cover 1450-1630 nm");
  if (fibre.raman_gain_per_w_per_m.empty()) throw ValidationError("fibre.raman_gain_table is empty");
  const auto& g = fibre.raman_gain_per_w_per_m;
  for (std::size_t i = 0; i < g.y().size(); ++i) {
    if (g.y()[i] < 0.0) throw ValidationError("fibre.raman_gain_table: negative gain at sample " + std::to_string(i));
  }
  if (g.x_min() <= 0.0 && g.y().front() != 0.0)
    throw ValidationError("fibre.raman_gain_table: gain at zero separation must be 0");
  if (!(fibre.gamma_per_w_per_m > 0.0)) throw ValidationError("fibre.gamma must be positive");
  if (!(fibre.effective_area_m2 > 0.0)) throw ValidationError("fibre.effective_area must be positive");
  if (!(fibre.reference_wavelength_m > 0.0)) throw ValidationError("fibre.reference_wavelength must be positive");
}

double PumpSpec::frequency_hz() const { return wavelength_to_frequency(wavelength_m); }

double AmplifierSpec::noise_figure_db_at(double frequency_hz) const {
  const AmplifierBand* best = nullptr;
  for (const auto& band : bands) {
    if (frequency_hz >= band.f_low_hz && frequency_hz <= band.f_high_hz) {
      if (best == nullptr || band.f_low_hz < best->f_low_hz) best = &band;
    }
  }
  if (best == nullptr) {
    throw RangeError("no amplifier band covers " + fmt_double(frequency_to_wavelength(frequency_hz) * 1e9) + " nm");
  }
  return best->noise_figure_db;
}

void validate(const AmplifierSpec& amp, const ChannelGrid& grid) {
  if (amp.bands.empty()) throw ValidationError("amplifier.bands is empty");
  auto sorted = amp.bands;
  std::sort(sorted.begin(), sorted.end(),
            [](const AmplifierBand& a, const AmplifierBand& b) { return a.f_low_hz < b.f_low_hz; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].f_high_hz > sorted[i].f_low_hz))
      throw ValidationError("amplifier.bands[" + std::to_string(i) + "]: empty band");
    if (!(sorted[i].noise_figure_db > 0.0))
      throw ValidationError("amplifier.bands[" + std::to_string(i) + "].noise_figure_db must be positive");
    if (i > 0 && sorted[i].f_low_hz < sorted[i - 1].f_high_hz * (1 - 1e-12))
      throw ValidationError("amplifier.bands overlap");
  }
  if (!(amp.temperature_k > 0.0)) throw ValidationError("amplifier.temperature_k must be positive");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      amp.noise_figure_db_at(grid.frequencies_hz[i]);
    } catch (const RangeError& e) {
      throw ValidationError("amplifier.bands do not cover channel " + std::to_string(i) + ": " + e.what());
    }
  }
}

void validate(const ScenarioConfig& s) {
  validate(s.grid);
  validate(s.fibre);
  validate(s.amplifier, s.grid);
  if (s.n_spans < 1) throw ValidationError("link.n_spans must be at least 1");
  for (std::size_t i = 0; i < s.pumps.size(); ++i) {
    const auto& p = s.pumps[i];
    const std::string tag = "pumps[" + std::to_string(i) + "]";
    if (p.power_w < 0.0) throw ValidationError(tag + ".power_mw must be non-negative");
    if (p.power_w > s.pump_limits.max_power_w * (1 + 1e-12))
      throw ValidationError(tag + ".power_mw = " + fmt_double(p.power_w * 1e3) + " exceeds the " +
                            fmt_double(s.pump_limits.max_power_w * 1e3) + " mW cap");
    const double tol = 1e-15;
    if (p.wavelength_m < s.pump_limits.band_low_m - tol || p.wavelength_m > s.pump_limits.band_high_m + tol)
      throw ValidationError(tag + ".wavelength_nm = " + fmt_double(p.wavelength_m * 1e9) + " outside the pump band " +
                            fmt_double(s.pump_limits.band_low_m * 1e9) + "-" +
                            fmt_double(s.pump_limits.band_high_m * 1e9) + " nm");
    if (!s.fibre.attenuation_per_m.covers(p.frequency_hz()))
      throw ValidationError(tag + ": attenuation table does not cover the pump wavelength");
  }
  for (double f : {s.grid.frequencies_hz.front(), s.grid.frequencies_hz.back()}) {
    if (!s.fibre.attenuation_per_m.covers(f))
      throw ValidationError("attenuation table does not cover the channel grid");
  }
  const auto& sv = s.solver;
  if (!(sv.max_step_m > 0.0)) throw ValidationError("solver.max_step_m must be positive");
  if (!(sv.bvp_tolerance_db > 0.0)) throw ValidationError("solver.bvp_tolerance_db must be positive");
  if (sv.bvp_max_iterations < 1) throw ValidationError("solver.bvp_max_iterations must be at least 1");
  if (!(sv.bvp_damping > 0.0 && sv.bvp_damping <= 1.0))
    throw ValidationError("solver.bvp_damping must lie in (0, 1]");
  const auto& nv = s.nli;
  if (nv.quadrature_points_per_axis < 16) throw ValidationError("nli.quadrature_points_per_axis must be >= 16");
  if (nv.channel_subsampling < 1) throw ValidationError("nli.channel_subsampling must be >= 1");
  if (nv.z_segments < 4) throw ValidationError("nli.z_segments must be >= 4");
  if (nv.coherence_epsilon < 0.0) throw ValidationError("nli.coherence_epsilon must be non-negative");
}

ScenarioConfig with_fidelity(ScenarioConfig s, Fidelity fidelity) {
  if (fidelity == Fidelity::reference) {
    s.nli.quadrature_points_per_axis = 400;
    s.nli.channel_subsampling = 1;
    s.nli.z_segments = 64;
    s.solver.span_mode = SpanMode::chain;
    s.solver.max_step_m = 100.0;
  } else {
    s.nli.quadrature_points_per_axis = 96;
    s.nli.channel_subsampling = 5;
    s.nli.z_segments = 24;
    s.solver.span_mode = SpanMode::single_span_reuse;
    s.solver.max_step_m = 500.0;
  }
  return s;
}

std::vector<double> CsvTable::column(std::size_t index) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(index));
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" + c + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ValidationError(path.string() + ": missing header");
  return table;
}

SampledCurve load_attenuation_table(const std::filesystem::path& path) {
  auto table = read_csv(path);
  if (table.header.size() != 2) throw ValidationError(path.string() + ": expected wavelength_nm,attenuation_db_km");
  std::vector<std::pair<double, double>> samples;
  for (const auto& r : table.rows) samples.emplace_back(wavelength_to_frequency(r[0] * 1e-9), db_per_km_to_per_m(r[1]));
  std::sort(samples.begin(), samples.end());
  std::vector<double> x, y;
  for (auto [f, a] : samples) {
    x.push_back(f);
    y.push_back(a);
  }
  return SampledCurve(std::move(x), std::move(y));
}

SampledCurve load_raman_gain_table(const std::filesystem::path& path) {
  auto table = read_csv(path);
  if (table.header.size() != 2) throw ValidationError(path.string() + ": expected delta_f_thz,gain_per_w_km");
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    x.push_back(r[0] * 1e12);
    y.push_back(r[1] * 1e-3);
  }
  return SampledCurve(std::move(x), std::move(y));
}

}  // namespace hybridlink
