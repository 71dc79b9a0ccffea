#include "hybridlink/raman_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "hybridlink/errors.hpp"
#include "hybridlink/snr_budget.hpp"
#include "hybridlink/units.hpp"

namespace hybridlink {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

constexpr double kNegativeExcursionW = -1e-15;
constexpr int kDivergenceRun = 5;

std::vector<double> node_grid(double length_m, double max_step_m) {
  const auto n_int = static_cast<std::size_t>(std::max(1.0, std::ceil(length_m / max_step_m - 1e-12)));
  std::vector<double> z(n_int + 1);
  for (std::size_t k = 0; k <= n_int; ++k) z[k] = length_m * static_cast<double>(k) / static_cast<double>(n_int);
  z.back() = length_m;
  return z;
}

// Exponential (log-linear) interpolation of stored profiles inside one
// node interval; falls back to linear when an endpoint is not positive.
class IntervalInterpolant {
 public:
  void set(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double z_lo, double z_hi) {
    z_lo_ = z_lo;
    const double h = z_hi - z_lo;
    lo_ = lo;
    rate_.resize(lo.size());
    exponential_.resize(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      exponential_[i] = lo[i] > 0.0 && hi[i] > 0.0;
      rate_[i] = exponential_[i] ? std::log(hi[i] / lo[i]) / h : (hi[i] - lo[i]) / h;
    }
  }

  void eval(double z, Eigen::Ref<Eigen::VectorXd> out) const {
    const double dz = z - z_lo_;
    for (Eigen::Index i = 0; i < lo_.size(); ++i) {
      out[i] = exponential_[i] ? lo_[i] * std::exp(rate_[i] * dz) : lo_[i] + rate_[i] * dz;
    }
  }

 private:
  double z_lo_ = 0.0;
  Eigen::VectorXd lo_;
  Eigen::VectorXd rate_;
  std::vector<bool> exponential_;
};

// Forward group layout: [channels, forward pumps, channel ASE].
struct Layout {
  std::size_t n_ch;
  std::size_t n_fp;
  std::size_t n_bp;
  std::size_t forward_size() const { return 2 * n_ch + n_fp; }
};

class SpanIntegrator {
 public:
  SpanIntegrator(const CoupledSystem& sys, const std::vector<double>& z)
      : sys_(sys), z_(z), layout_{sys.n_channels(), sys.forward_pumps().size(), sys.backward_pumps().size()} {
    const std::size_t nw = sys.n_waves();
    const auto& bp = sys.backward_pumps();
    backward_rows_.resize(static_cast<Eigen::Index>(bp.size()), static_cast<Eigen::Index>(nw));
    for (std::size_t r = 0; r < bp.size(); ++r) backward_rows_.row(static_cast<Eigen::Index>(r)) = sys.coupling().row(static_cast<Eigen::Index>(bp[r]));
    weights_.resize(static_cast<Eigen::Index>(nw));
    bp_now_.resize(static_cast<Eigen::Index>(bp.size()));
    fwd_weights_now_.resize(static_cast<Eigen::Index>(nw));
  }

  // Integrates the forward group over all nodes with backward pumps frozen
  // at `backward` (bp x z). Returns forward states (forward_size x z).
  Eigen::MatrixXd forward(const Eigen::VectorXd& initial, const Eigen::MatrixXd& backward) {
    const std::size_t nz = z_.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(layout_.forward_size()), static_cast<Eigen::Index>(nz));
    State y(initial.data(), initial.data() + initial.size());
    out.col(0) = initial;
    const bool has_bp = layout_.n_bp > 0;
    for (std::size_t k = 0; k + 1 < nz; ++k) {
      if (has_bp) bp_interp_.set(backward.col(static_cast<Eigen::Index>(k)), backward.col(static_cast<Eigen::Index>(k + 1)), z_[k], z_[k + 1]);
      auto rhs = [this, has_bp](const State& x, State& dxdz, double z) {
        if (has_bp) bp_interp_.eval(z, bp_now_);
        forward_rhs(x, dxdz, bp_now_);
      };
      step_interval(rhs, y, z_[k], z_[k + 1]);
      check_and_floor(y, k + 1, /*ase_offset=*/layout_.n_ch + layout_.n_fp);
      out.col(static_cast<Eigen::Index>(k + 1)) = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    }
    return out;
  }

  // Integrates backward pumps from z = L towards z = 0 against frozen
  // forward states. Returns bp x z.
  Eigen::MatrixXd backward(const Eigen::VectorXd& final_values, const Eigen::MatrixXd& forward_states) {
    const std::size_t nz = z_.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(layout_.n_bp), static_cast<Eigen::Index>(nz));
    const Eigen::MatrixXd fwd_weights = forward_weights(forward_states);
    State y(final_values.data(), final_values.data() + final_values.size());
    out.col(static_cast<Eigen::Index>(nz - 1)) = final_values;
    for (std::size_t k = nz - 1; k > 0; --k) {
      fwd_interp_.set(fwd_weights.col(static_cast<Eigen::Index>(k - 1)), fwd_weights.col(static_cast<Eigen::Index>(k)), z_[k - 1], z_[k]);
      auto rhs = [this](const State& x, State& dxdz, double z) {
        fwd_interp_.eval(z, fwd_weights_now_);
        backward_rhs(x, dxdz, fwd_weights_now_);
      };
      step_interval(rhs, y, z_[k], z_[k - 1]);
      check_and_floor(y, k - 1, /*ase_offset=*/y.size());
      out.col(static_cast<Eigen::Index>(k - 1)) = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    }
    return out;
  }

 private:
  // The bounded controlled stepper only handles increasing time, so a
  // backward interval is integrated in t = z0 - z with the sign flipped.
  template <class Rhs>
  void step_interval(Rhs& rhs, State& y, double z0, double z1) {
    const auto& s = sys_.settings();
    const double h = std::abs(z1 - z0);
    auto stepper = odeint::make_controlled(s.abs_tolerance_w, s.rel_tolerance, h,
                                           odeint::runge_kutta_dopri5<State>());
    if (z1 >= z0) {
      odeint::integrate_adaptive(stepper, rhs, y, z0, z1, h);
      return;
    }
    auto flipped = [&rhs, z0](const State& x, State& dxdt, double t) {
      rhs(x, dxdt, z0 - t);
      for (double& d : dxdt) d = -d;
    };
    odeint::integrate_adaptive(stepper, flipped, y, 0.0, h, h);
  }

  void check_and_floor(State& y, std::size_t node, std::size_t ase_offset) const {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] >= 0.0) continue;
      const bool ase = i >= ase_offset;
      if (ase && sys_.settings().spontaneous_on_depletion) {
        y[i] = 0.0;
        continue;
      }
      if (y[i] < kNegativeExcursionW) {
        std::ostringstream os;
        os << "negative power " << y[i] << " W at z = " << z_[node] << " m (state " << i
           << "); reduce solver.max_step_m";
        throw NumericalError(os.str());
      }
      y[i] = 0.0;
    }
  }

  // Channel weights P + ASE (when enabled) and forward pumps, placed into a
  // full-length wave vector; backward pump slots stay zero.
  void fill_forward_weights(const double* x, Eigen::VectorXd& w) const {
    const std::size_t n_ch = layout_.n_ch;
    const bool with_ase = sys_.settings().ase_in_signal_equation;
    for (std::size_t i = 0; i < n_ch; ++i) w[static_cast<Eigen::Index>(i)] = x[i] + (with_ase ? x[n_ch + layout_.n_fp + i] : 0.0);
    const auto& fp = sys_.forward_pumps();
    for (std::size_t r = 0; r < fp.size(); ++r) w[static_cast<Eigen::Index>(fp[r])] = x[n_ch + r];
  }

  Eigen::MatrixXd forward_weights(const Eigen::MatrixXd& states) const {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys_.n_waves()), states.cols());
    Eigen::VectorXd col(static_cast<Eigen::Index>(sys_.n_waves()));
    for (Eigen::Index k = 0; k < states.cols(); ++k) {
      col.setZero();
      fill_forward_weights(states.col(k).data(), col);
      w.col(k) = col;
    }
    return w;
  }

  void forward_rhs(const State& x, State& dxdz, const Eigen::VectorXd& bp_values) {
    const std::size_t n_ch = layout_.n_ch;
    const std::size_t n_fp = layout_.n_fp;
    weights_.setZero();
    fill_forward_weights(x.data(), weights_);
    const auto& bp = sys_.backward_pumps();
    for (std::size_t r = 0; r < bp.size(); ++r) weights_[static_cast<Eigen::Index>(bp[r])] = bp_values[static_cast<Eigen::Index>(r)];

    rate_.noalias() = sys_.coupling() * weights_;
    rate_ -= sys_.attenuation();
    source_.noalias() = sys_.source() * weights_;

    for (std::size_t i = 0; i < n_ch; ++i) {
      const double r = rate_[static_cast<Eigen::Index>(i)];
      dxdz[i] = r * x[i];
      dxdz[n_ch + n_fp + i] = r * x[n_ch + n_fp + i] + source_[static_cast<Eigen::Index>(i)];
    }
    const auto& fp = sys_.forward_pumps();
    for (std::size_t r = 0; r < fp.size(); ++r) dxdz[n_ch + r] = rate_[static_cast<Eigen::Index>(fp[r])] * x[n_ch + r];
  }

  void backward_rhs(const State& x, State& dxdz, Eigen::VectorXd& w) {
    const auto& bp = sys_.backward_pumps();
    for (std::size_t r = 0; r < bp.size(); ++r) w[static_cast<Eigen::Index>(bp[r])] = x[r];
    bp_rate_.noalias() = backward_rows_ * w;
    for (std::size_t r = 0; r < bp.size(); ++r) {
      const double growth = bp_rate_[static_cast<Eigen::Index>(r)] - sys_.attenuation()[static_cast<Eigen::Index>(bp[r])];
      dxdz[r] = -growth * x[r];
    }
  }

  const CoupledSystem& sys_;
  const std::vector<double>& z_;
  Layout layout_;
  Eigen::MatrixXd backward_rows_;
  Eigen::VectorXd weights_, rate_, source_, bp_rate_, bp_now_, fwd_weights_now_;
  IntervalInterpolant bp_interp_, fwd_interp_;
};

double max_residual_db(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  constexpr double floor_w = 1e-18;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = std::abs(linear_to_db((a.data()[i] + floor_w) / (b.data()[i] + floor_w)));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace

double kappa(double delta_f_hz, double temperature_k) {
  if (!(delta_f_hz > 0.0))
    throw ValidationError("kappa: frequency separation must be positive (spontaneous term undefined at zero separation)");
  if (!(temperature_k > 0.0)) throw ValidationError("kappa: temperature must be positive");
  return -1.0 / std::expm1(-kPlanck * delta_f_hz / (kBoltzmann * temperature_k));
}

CoupledSystem::CoupledSystem(const ChannelGrid& grid, const FibreSpec& fibre, std::span<const PumpSpec> pumps,
                             const SolverSettings& settings, double temperature_k)
    : n_channels_(grid.size()), n_pumps_(pumps.size()), settings_(settings) {
  const auto nw = static_cast<Eigen::Index>(n_waves());
  const auto nc = static_cast<Eigen::Index>(n_channels_);
  frequency_.resize(nw);
  alpha_.resize(nw);
  for (Eigen::Index i = 0; i < nc; ++i) frequency_[i] = grid.frequencies_hz[static_cast<std::size_t>(i)];
  for (std::size_t p = 0; p < n_pumps_; ++p) {
    frequency_[nc + static_cast<Eigen::Index>(p)] = pumps[p].frequency_hz();
    (pumps[p].direction == PumpDirection::forward ? forward_pumps_ : backward_pumps_).push_back(n_channels_ + p);
  }
  for (Eigen::Index i = 0; i < nw; ++i) alpha_[i] = attenuation_at(fibre, frequency_[i]);

  coupling_ = Eigen::MatrixXd::Zero(nw, nw);
  source_ = Eigen::MatrixXd::Zero(nc, nw);
  for (Eigen::Index i = 0; i < nw; ++i) {
    for (Eigen::Index j = 0; j < nw; ++j) {
      if (i == j) continue;
      const double fi = frequency_[i];
      const double fj = frequency_[j];
      const double g = raman_gain_at(fibre, std::abs(fi - fj));
      if (g == 0.0) continue;
      double c;
      if (fj > fi) {
        c = g;
      } else {
        const double ratio = settings.raman_convention == RamanConvention::as_printed ? fj / fi : fi / fj;
        c = -ratio * g;
        if (!settings.pump_depletion && i >= nc && j < nc) c = 0.0;
      }
      coupling_(i, j) = c;
      if (i < nc && settings.spontaneous_emission && (c > 0.0 || settings.spontaneous_on_depletion)) {
        source_(i, j) = c * 2.0 * kPlanck * kappa(std::abs(fi - fj), temperature_k) * grid.channel_bandwidth_hz * fi;
      }
    }
  }
}

Eigen::VectorXd CoupledSystem::growth_rate(const Eigen::VectorXd& weights) const {
  return coupling_ * weights - alpha_;
}

RelaxationResult relax_backward_pumps(const Eigen::MatrixXd& initial_guess, const CoupledSystem& system,
                                      const std::vector<double>& z_m, const Eigen::VectorXd& forward_initial,
                                      const Eigen::VectorXd& backward_final) {
  const auto& s = system.settings();
  SpanIntegrator integrator(system, z_m);
  RelaxationResult result;
  Eigen::MatrixXd pumps = initial_guess;
  int growing = 0;
  for (int it = 1; it <= s.bvp_max_iterations; ++it) {
    Eigen::MatrixXd fwd = integrator.forward(forward_initial, pumps);
    Eigen::MatrixXd updated = integrator.backward(backward_final, fwd);
    const double residual = max_residual_db(updated, pumps);
    result.residual_db.push_back(residual);
    result.iterations = it;
    if (residual <= s.bvp_tolerance_db) {
      result.backward_pumps = std::move(updated);
      result.forward_states = integrator.forward(forward_initial, result.backward_pumps);
      return result;
    }
    if (it > 1 && residual > result.residual_db[result.residual_db.size() - 2]) {
      if (++growing >= kDivergenceRun) {
        std::ostringstream os;
        os << "backward-pump relaxation diverging (residual " << residual << " dB after " << it
           << " sweeps); reduce solver.bvp_damping";
        throw NumericalError(os.str());
      }
    } else {
      growing = 0;
    }
    pumps = (1.0 - s.bvp_damping) * pumps + s.bvp_damping * updated;
  }
  std::ostringstream os;
  os << "backward-pump relaxation did not converge in " << s.bvp_max_iterations << " sweeps; last residual "
     << result.residual_db.back() << " dB";
  throw NumericalError(os.str());
}

SpanSolution solve_span(const ChannelGrid& grid, const FibreSpec& fibre, std::span<const PumpSpec> pumps,
                        std::span<const double> ase_in_w, const SolverSettings& settings, double temperature_k,
                        const Eigen::MatrixXd* backward_warm_start) {
  if (ase_in_w.size() != grid.size()) throw ValidationError("solve_span: ase_in must have one entry per channel");
  for (double a : ase_in_w) {
    if (a < 0.0) throw ValidationError("solve_span: ase_in must be non-negative");
  }
  const CoupledSystem system(grid, fibre, pumps, settings, temperature_k);
  const std::size_t n_ch = grid.size();
  const std::size_t n_fp = system.forward_pumps().size();
  const std::size_t n_bp = system.backward_pumps().size();
  const double length = fibre.span_length_m;

  SpanSolution sol;
  sol.z_m = node_grid(length, settings.max_step_m);
  const auto nz = static_cast<Eigen::Index>(sol.z_m.size());

  Eigen::VectorXd fwd0(static_cast<Eigen::Index>(2 * n_ch + n_fp));
  for (std::size_t i = 0; i < n_ch; ++i) {
    fwd0[static_cast<Eigen::Index>(i)] = grid.launch_power_w[i];
    fwd0[static_cast<Eigen::Index>(n_ch + n_fp + i)] = ase_in_w[i];
  }
  for (std::size_t r = 0; r < n_fp; ++r) fwd0[static_cast<Eigen::Index>(n_ch + r)] = pumps[system.forward_pumps()[r] - n_ch].power_w;

  Eigen::VectorXd bpL(static_cast<Eigen::Index>(n_bp));
  for (std::size_t r = 0; r < n_bp; ++r) bpL[static_cast<Eigen::Index>(r)] = pumps[system.backward_pumps()[r] - n_ch].power_w;

  Eigen::MatrixXd fwd;
  Eigen::MatrixXd bwd(static_cast<Eigen::Index>(n_bp), nz);
  if (n_bp == 0) {
    SpanIntegrator integrator(system, sol.z_m);
    fwd = integrator.forward(fwd0, bwd);
  } else {
    Eigen::MatrixXd guess;
    if (backward_warm_start != nullptr && backward_warm_start->rows() == static_cast<Eigen::Index>(n_bp) &&
        backward_warm_start->cols() == nz) {
      guess = *backward_warm_start;
    } else {
      guess.resize(static_cast<Eigen::Index>(n_bp), nz);
      for (std::size_t r = 0; r < n_bp; ++r) {
        const double a = system.attenuation()[static_cast<Eigen::Index>(system.backward_pumps()[r])];
        for (Eigen::Index k = 0; k < nz; ++k) {
          guess(static_cast<Eigen::Index>(r), k) = bpL[static_cast<Eigen::Index>(r)] * std::exp(-a * (length - sol.z_m[static_cast<std::size_t>(k)]));
        }
      }
    }
    auto relaxed = relax_backward_pumps(guess, system, sol.z_m, fwd0, bpL);
    fwd = std::move(relaxed.forward_states);
    bwd = std::move(relaxed.backward_pumps);
    sol.bvp_iterations = relaxed.iterations;
    sol.bvp_residual_db = std::move(relaxed.residual_db);
  }

  const auto nc = static_cast<Eigen::Index>(n_ch);
  sol.signal_w = fwd.topRows(nc);
  sol.ase_w = fwd.bottomRows(nc);
  sol.pump_w.resize(static_cast<Eigen::Index>(pumps.size()), nz);
  for (std::size_t r = 0; r < n_fp; ++r)
    sol.pump_w.row(static_cast<Eigen::Index>(system.forward_pumps()[r] - n_ch)) = fwd.row(static_cast<Eigen::Index>(n_ch + r));
  for (std::size_t r = 0; r < n_bp; ++r)
    sol.pump_w.row(static_cast<Eigen::Index>(system.backward_pumps()[r] - n_ch)) = bwd.row(static_cast<Eigen::Index>(r));
  sol.ase_out_w.resize(n_ch);
  for (std::size_t i = 0; i < n_ch; ++i) sol.ase_out_w[i] = sol.ase_w(static_cast<Eigen::Index>(i), nz - 1);
  sol.rho.resize(nc, nz);
  for (Eigen::Index i = 0; i < nc; ++i) {
    const double p0 = sol.signal_w(i, 0);
    sol.rho.row(i) = sol.signal_w.row(i) / p0;
    sol.rho(i, 0) = 1.0;
  }
  return sol;
}

LinkPropagation propagate_link(const ScenarioConfig& scenario) {
  const auto& grid = scenario.grid;
  const std::size_t n_ch = grid.size();
  LinkPropagation link;
  link.edfa_gain.assign(n_ch, 1.0);
  link.raman_ase_per_span.assign(n_ch, 0.0);
  link.edfa_ase_per_span.assign(n_ch, 0.0);

  std::vector<double> nf_db(n_ch);
  for (std::size_t i = 0; i < n_ch; ++i) nf_db[i] = scenario.amplifier.noise_figure_db_at(grid.frequencies_hz[i]);

  // EDFA after a span. A net-gain span (G < 1) is levelled by a passive
  // attenuator, which adds no noise.
  auto amplify = [&](const SpanSolution& span, std::vector<double>& gain, std::vector<double>& raman_amplified,
                     std::vector<double>& edfa) {
    const auto last = static_cast<Eigen::Index>(span.n_z() - 1);
    for (std::size_t i = 0; i < n_ch; ++i) {
      gain[i] = edfa_gain(span.signal_w(static_cast<Eigen::Index>(i), 0), span.signal_w(static_cast<Eigen::Index>(i), last));
      raman_amplified[i] = gain[i] * span.ase_out_w[i];
      edfa[i] = gain[i] >= 1.0 ? edfa_ase(gain[i], nf_db[i], grid.frequencies_hz[i], grid.channel_bandwidth_hz) : 0.0;
    }
  };

  const std::vector<double> zero_ase(n_ch, 0.0);
  if (scenario.solver.span_mode == SpanMode::single_span_reuse) {
    link.spans.push_back(solve_span(grid, scenario.fibre, scenario.pumps, zero_ase, scenario.solver,
                                    scenario.amplifier.temperature_k));
    amplify(link.spans.front(), link.edfa_gain, link.raman_ase_per_span, link.edfa_ase_per_span);
    link.accumulated_ase_w.resize(n_ch);
    for (std::size_t i = 0; i < n_ch; ++i)
      link.accumulated_ase_w[i] = scenario.n_spans * (link.raman_ase_per_span[i] + link.edfa_ase_per_span[i]);
    return link;
  }

  std::vector<double> ase = zero_ase;
  std::vector<double> gain(n_ch), raman_amp(n_ch), edfa(n_ch);
  link.spans.reserve(static_cast<std::size_t>(scenario.n_spans));
  for (int s = 0; s < scenario.n_spans; ++s) {
    const Eigen::MatrixXd* warm = nullptr;
    Eigen::MatrixXd warm_profile;
    if (!link.spans.empty() && !scenario.pumps.empty()) {
      // Reorder pump rows into the backward-only layout used by the relaxation.
      const auto& prev = link.spans.back();
      std::vector<Eigen::Index> rows;
      for (std::size_t p = 0; p < scenario.pumps.size(); ++p)
        if (scenario.pumps[p].direction == PumpDirection::backward) rows.push_back(static_cast<Eigen::Index>(p));
      warm_profile.resize(static_cast<Eigen::Index>(rows.size()), prev.pump_w.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) warm_profile.row(static_cast<Eigen::Index>(r)) = prev.pump_w.row(rows[r]);
      warm = &warm_profile;
    }
    try {
      link.spans.push_back(solve_span(grid, scenario.fibre, scenario.pumps, ase, scenario.solver,
                                      scenario.amplifier.temperature_k, warm));
    } catch (const NumericalError& e) {
      throw NumericalError("span " + std::to_string(s + 1) + ": " + e.what());
    }
    amplify(link.spans.back(), gain, raman_amp, edfa);
    for (std::size_t i = 0; i < n_ch; ++i) ase[i] = raman_amp[i] + edfa[i];
    if (s == 0) {
      link.raman_ase_per_span = raman_amp;
      link.edfa_ase_per_span = edfa;
    }
  }
  link.edfa_gain = gain;
  link.accumulated_ase_w = ase;
  return link;
}

}  // namespace hybridlink
