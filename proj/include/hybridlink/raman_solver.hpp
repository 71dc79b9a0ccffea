#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hybridlink/link_config.hpp"
#include "hybridlink/settings.hpp"

namespace hybridlink {

/// Bose-Einstein factor 1 + eta = 1 / (1 - exp(-h df / (kB T))) of the
/// spontaneous Raman source. Throws ValidationError for df <= 0 or T <= 0.
double kappa(double delta_f_hz, double temperature_k);

/// Sampled solution of one span. Matrices are [wave x z-sample].
struct SpanSolution {
  std::vector<double> z_m;
  Eigen::MatrixXd signal_w;
  Eigen::MatrixXd pump_w;
  Eigen::MatrixXd ase_w;
  std::vector<double> ase_out_w;  // ase_w at z = L
  Eigen::MatrixXd rho;            // signal_w / signal_w(:, 0)

  int bvp_iterations = 0;
  std::vector<double> bvp_residual_db;  // undamped map residual per sweep

  std::size_t n_z() const { return z_m.size(); }
};

/// Pairwise coupling of all waves (channels first, then pumps) for one span.
///
/// For every wave i and every other wave j with W_j = P_j (+ P_ASE,j):
///   f_j > f_i:  +g(|df|) W_j P_i                 (i is pumped by j)
///   f_j < f_i:  -r_ij g(|df|) W_j P_i            (i pumps j)
/// with r_ij = f_j / f_i (as-printed) or f_i / f_j (photon-conserving). The
/// direction sign of wave i multiplies the whole right-hand side, so backward
/// waves grow towards z = 0 when pumped.
class CoupledSystem {
 public:
  CoupledSystem(const ChannelGrid& grid, const FibreSpec& fibre, std::span<const PumpSpec> pumps,
                const SolverSettings& settings, double temperature_k);

  std::size_t n_channels() const { return n_channels_; }
  std::size_t n_pumps() const { return n_pumps_; }
  std::size_t n_waves() const { return n_channels_ + n_pumps_; }

  const std::vector<std::size_t>& forward_pumps() const { return forward_pumps_; }
  const std::vector<std::size_t>& backward_pumps() const { return backward_pumps_; }

  const Eigen::VectorXd& frequencies() const { return frequency_; }
  const Eigen::VectorXd& attenuation() const { return alpha_; }
  const Eigen::MatrixXd& coupling() const { return coupling_; }
  const Eigen::MatrixXd& source() const { return source_; }
  const SolverSettings& settings() const { return settings_; }

  /// Net per-wave growth rate (M W - alpha), without the direction sign.
  Eigen::VectorXd growth_rate(const Eigen::VectorXd& weights) const;

 private:
  std::size_t n_channels_;
  std::size_t n_pumps_;
  Eigen::VectorXd frequency_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd coupling_;  // n_waves x n_waves
  Eigen::MatrixXd source_;    // n_channels x n_waves, 2 h kappa B f_i g ...
  std::vector<std::size_t> forward_pumps_;
  std::vector<std::size_t> backward_pumps_;
  SolverSettings settings_;
};

/// Converged backward-pump profiles with the forward states they imply.
struct RelaxationResult {
  Eigen::MatrixXd forward_states;  // [channels, forward pumps, ASE] x z
  Eigen::MatrixXd backward_pumps;  // backward pumps x z
  int iterations = 0;
  std::vector<double> residual_db;
};

/// Damped forward-backward fixed-point iteration for the two-point
/// boundary-value problem created by backward pumps:
///   (a) forward waves integrated over z with the current pump profiles
///   (b) backward pumps integrated from z = L against those forward waves
///   (c) pumps <- (1 - damping) pumps + damping * (b), until the undamped
///       residual is within bvp_tolerance_db.
/// Throws NumericalError on non-convergence or divergence.
RelaxationResult relax_backward_pumps(const Eigen::MatrixXd& initial_guess, const CoupledSystem& system,
                                      const std::vector<double>& z_m, const Eigen::VectorXd& forward_initial,
                                      const Eigen::VectorXd& backward_final);

SpanSolution solve_span(const ChannelGrid& grid, const FibreSpec& fibre, std::span<const PumpSpec> pumps,
                        std::span<const double> ase_in_w, const SolverSettings& settings, double temperature_k,
                        const Eigen::MatrixXd* backward_warm_start = nullptr);

struct LinkPropagation {
  std::vector<SpanSolution> spans;
  std::vector<double> edfa_gain;           // per channel, linear (last span)
  std::vector<double> raman_ase_per_span;  // G * Raman ASE of a span launched with zero ASE
  std::vector<double> edfa_ase_per_span;
  std::vector<double> accumulated_ase_w;   // after the last EDFA
};

/// Solves all spans (or one span in single-span-reuse mode). After each span
/// the ideal EDFA restores launch power, amplifies the Raman ASE, and adds
/// its own ASE; the result seeds the next span.
LinkPropagation propagate_link(const ScenarioConfig& scenario);

}  // namespace hybridlink
