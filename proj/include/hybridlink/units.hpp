#pragma once

#include <cmath>

namespace hybridlink {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K

// 10/ln(10): dB per neper of power.
inline constexpr double kDbPerNeper = 4.342944819032518;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watt_to_dbm(double w) { return linear_to_db(w / 1e-3); }

// Power attenuation coefficient, dB/km <-> 1/m.
inline double db_per_km_to_per_m(double db_km) { return db_km / kDbPerNeper / 1e3; }
inline double per_m_to_db_per_km(double per_m) { return per_m * kDbPerNeper * 1e3; }

inline double wavelength_to_frequency(double wavelength_m) { return kSpeedOfLight / wavelength_m; }
inline double frequency_to_wavelength(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

inline double nm(double x) { return x * 1e-9; }
inline double km(double x) { return x * 1e3; }
inline double thz(double x) { return x * 1e12; }
inline double ghz(double x) { return x * 1e9; }

}  // namespace hybridlink
