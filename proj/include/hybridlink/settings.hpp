#pragma once

#include <string>
#include <string_view>

namespace hybridlink {

/// Frequency-ratio factor applied to the donor's depletion term in the
/// pairwise Raman coupling.
///   as_printed:        donor loses (f_acceptor / f_donor) g P_a P_d
///   photon_conserving: donor loses (f_donor / f_acceptor) g P_a P_d
enum class RamanConvention { as_printed, photon_conserving };

/// How a link of identical spans is propagated.
///   chain:             every span solved explicitly, ASE fed forward
///   single_span_reuse: one span solved, ASE accumulated by the linear
///                      per-span recurrence
enum class SpanMode { chain, single_span_reuse };

enum class AccumulationMode { incoherent, coherent_epsilon };

enum class Fidelity { fast, reference };

struct SolverSettings {
  double max_step_m = 100.0;
  double bvp_tolerance_db = 1e-4;
  int bvp_max_iterations = 50;
  double bvp_damping = 0.7;
  RamanConvention raman_convention = RamanConvention::as_printed;
  SpanMode span_mode = SpanMode::chain;

  // Keep (P_k + P_ASE,k) in the signal/pump equations. Dropping the ASE part
  // decouples signals from noise, which is a speed knob only.
  bool ase_in_signal_equation = true;

  // Spontaneous source 2 h kappa B f also on the depletion (anti-Stokes) terms.
  // Off: the source appears on Stokes gain terms only. On: every pairwise
  // term carries it and the ASE state is floored at zero.
  bool spontaneous_on_depletion = false;

  // Relative/absolute tolerances of the embedded Runge-Kutta stepper.
  double rel_tolerance = 1e-10;
  double abs_tolerance_w = 1e-22;

  // Test hooks. Not exposed through scenario files.
  bool spontaneous_emission = true;  // drop 2 h kappa B f sources when false
  bool pump_depletion = true;        // pumps not depleted by signals/ASE when false
};

struct NliSettings {
  int quadrature_points_per_axis = 400;
  int channel_subsampling = 1;
  int z_segments = 64;
  AccumulationMode accumulation = AccumulationMode::incoherent;
  double coherence_epsilon = 0.0;
};

std::string_view to_string(RamanConvention c);
std::string_view to_string(SpanMode m);
std::string_view to_string(AccumulationMode m);
std::string_view to_string(Fidelity f);

RamanConvention parse_raman_convention(std::string_view s);
SpanMode parse_span_mode(std::string_view s);
AccumulationMode parse_accumulation_mode(std::string_view s);
Fidelity parse_fidelity(std::string_view s);

}  // namespace hybridlink
