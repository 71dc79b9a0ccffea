#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hybridlink/settings.hpp"

namespace hybridlink {

/// WDM comb. Frequencies ascend; spacing equals the channel bandwidth.
struct ChannelGrid {
  std::vector<double> frequencies_hz;
  double channel_bandwidth_hz = 0.0;
  std::vector<double> launch_power_w;

  std::size_t size() const { return frequencies_hz.size(); }
  double total_power_w() const;
  double center_frequency_hz() const;
  double lower_edge_hz() const { return frequencies_hz.front() - 0.5 * channel_bandwidth_hz; }
  double upper_edge_hz() const { return frequencies_hz.back() + 0.5 * channel_bandwidth_hz; }
};

/// Uniform-power Nyquist comb centred on c / center_wavelength. Even channel
/// counts straddle the centre frequency.
ChannelGrid build_channel_grid(double center_wavelength_m, int n_channels, double symbol_rate_hz,
                               double total_power_w);

/// Same comb with every launch power replaced by total/n.
ChannelGrid with_total_power(ChannelGrid grid, double total_power_w);

void validate(const ChannelGrid& grid);

/// Piecewise-linear table y(x) over strictly ascending x.
class SampledCurve {
 public:
  SampledCurve() = default;
  SampledCurve(std::vector<double> x, std::vector<double> y);

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  bool empty() const { return x_.empty(); }
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool covers(double x) const { return !x_.empty() && x >= x_.front() && x <= x_.back(); }

  /// Linear interpolation; the caller guarantees covers(x).
  double operator()(double x) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

struct FibreSpec {
  double span_length_m = 0.0;
  SampledCurve attenuation_per_m;      // vs absolute frequency [Hz]
  SampledCurve raman_gain_per_w_per_m; // vs frequency separation [Hz], already / A_eff
  double dispersion_s_per_m2 = 0.0;    // D
  double dispersion_slope_s_per_m3 = 0.0;  // S
  double gamma_per_w_per_m = 0.0;
  double effective_area_m2 = 0.0;
  double reference_wavelength_m = 1550e-9;
};

/// Attenuation coefficient [1/m]. Throws RangeError outside the table.
double attenuation_at(const FibreSpec& fibre, double frequency_hz);

/// Raman gain [1/(W m)]; zero at zero separation and beyond the table.
double raman_gain_at(const FibreSpec& fibre, double delta_f_hz);

/// Group-velocity dispersion coefficients at the reference wavelength.
double beta2_at_reference(const FibreSpec& fibre);
double beta3_at_reference(const FibreSpec& fibre);

void validate(const FibreSpec& fibre);

enum class PumpDirection { forward, backward };

struct PumpSpec {
  double wavelength_m = 0.0;
  double power_w = 0.0;  // at the injection end (z = 0 forward, z = L backward)
  PumpDirection direction = PumpDirection::backward;

  double frequency_hz() const;
};

struct PumpLimits {
  double max_power_w = 0.5;
  double band_low_m = 1470e-9;
  double band_high_m = 1520e-9;
};

struct AmplifierBand {
  double f_low_hz = 0.0;
  double f_high_hz = 0.0;
  double noise_figure_db = 0.0;
};

struct AmplifierSpec {
  std::vector<AmplifierBand> bands;
  double temperature_k = 300.0;

  /// NF of the band containing f. A frequency on a shared edge takes the
  /// lower-frequency band. Throws RangeError when no band contains f.
  double noise_figure_db_at(double frequency_hz) const;
};

void validate(const AmplifierSpec& amp, const ChannelGrid& grid);

struct ScenarioConfig {
  ChannelGrid grid;
  FibreSpec fibre;
  std::vector<PumpSpec> pumps;
  PumpLimits pump_limits;
  AmplifierSpec amplifier;
  int n_spans = 1;
  NliSettings nli;
  SolverSettings solver;
};

void validate(const ScenarioConfig& scenario);

/// Overrides the numerical controls for the requested fidelity level.
ScenarioConfig with_fidelity(ScenarioConfig scenario, Fidelity fidelity);

/// Numeric CSV with a single header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::size_t index) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Two-column wavelength_nm,dB/km table -> attenuation [1/m] vs frequency.
SampledCurve load_attenuation_table(const std::filesystem::path& path);

/// Two-column delta_f_thz,1/(W km) table -> gain [1/(W m)] vs separation.
SampledCurve load_raman_gain_table(const std::filesystem::path& path);

/// Reads a JSON scenario file (comments allowed); table paths resolve
/// relative to the file. Every invariant is checked before returning.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parses an already-loaded JSON document; base_dir resolves table paths.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace hybridlink
