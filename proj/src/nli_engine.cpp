#include "hybridlink/nli_engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hybridlink/errors.hpp"
#include "hybridlink/parallel.hpp"
#include "hybridlink/units.hpp"

namespace hybridlink {

namespace {

// Smallest cell half-width around f1 = f (and f2 = f) relative to the
// channel bandwidth.
constexpr double kInnerCellFraction = 1e-5;

struct Axis {
  std::vector<double> edges;  // ascending offsets from the channel centre
};

// Cells graded geometrically away from zero on both sides of a central cell.
Axis graded_axis(double lower, double upper, double inner, int cells) {
  const double ln_up = std::log(upper / inner);
  const double ln_lo = std::log(-lower / inner);
  const int outer = cells - 1;
  int n_up = static_cast<int>(std::lround(outer * ln_up / (ln_up + ln_lo)));
  n_up = std::clamp(n_up, 1, outer - 1);
  const int n_lo = outer - n_up;
  Axis axis;
  axis.edges.reserve(static_cast<std::size_t>(cells + 1));
  for (int k = n_lo; k >= 1; --k) axis.edges.push_back(-inner * std::exp(ln_lo * k / n_lo));
  axis.edges.push_back(-inner);
  for (int k = 0; k <= n_up; ++k) axis.edges.push_back(inner * std::exp(ln_up * k / n_up));
  axis.edges.front() = lower;
  axis.edges.back() = upper;
  return axis;
}

// Area of [0,wx] x [0,wy] below the line x + y = t.
double area_below(double t, double wx, double wy) {
  if (t <= 0.0) return 0.0;
  if (t >= wx + wy) return wx * wy;
  auto q = [](double s) { return s > 0.0 ? 0.5 * s * s : 0.0; };
  return q(t) - q(t - wx) - q(t - wy) + q(t - wx - wy);
}

class NliIntegral {
 public:
  NliIntegral(const ChannelGrid& grid, const FibreSpec& fibre, const SpanSolution& span, const NliSettings& settings)
      : grid_(grid), settings_(settings) {
    if (settings.quadrature_points_per_axis < 16)
      throw ValidationError("nli: quadrature_points_per_axis must be >= 16");
    if (settings.z_segments < 1) throw ValidationError("nli: z_segments must be >= 1");
    if (static_cast<std::size_t>(span.rho.rows()) != grid.size())
      throw ValidationError("nli: span was not solved on this channel grid");

    n_ch_ = grid.size();
    bandwidth_ = grid.channel_bandwidth_hz;
    f_lo_ = grid.lower_edge_hz();
    f_hi_ = grid.upper_edge_hz();
    fc_ = grid.center_frequency_hz();
    const double f_ref = wavelength_to_frequency(fibre.reference_wavelength_m);
    beta3_ = beta3_at_reference(fibre);
    beta2c_ = beta2_at_reference(fibre) + 2.0 * M_PI * beta3_ * (fc_ - f_ref);
    gamma_ = fibre.gamma_per_w_per_m;
    psd_.resize(n_ch_);
    for (std::size_t i = 0; i < n_ch_; ++i) psd_[i] = grid.launch_power_w[i] / bandwidth_;

    // sqrt(rho) and its log-slope on uniform z nodes.
    n_seg_ = static_cast<std::size_t>(settings.z_segments);
    const double length = span.z_m.back();
    dz_ = length / static_cast<double>(n_seg_);
    root_.assign(n_ch_ * (n_seg_ + 1), 0.0);
    slope_.assign(n_ch_ * n_seg_, 0.0);
    std::vector<double> ln_rho(n_seg_ + 1);
    for (std::size_t c = 0; c < n_ch_; ++c) {
      for (std::size_t k = 0; k <= n_seg_; ++k) {
        ln_rho[k] = log_rho_at(span, c, dz_ * static_cast<double>(k));
        root_[c * (n_seg_ + 1) + k] = std::exp(0.5 * ln_rho[k]);
      }
      for (std::size_t k = 0; k < n_seg_; ++k) slope_[c * n_seg_ + k] = 0.5 * (ln_rho[k + 1] - ln_rho[k]) / dz_;
    }
  }

  double channel(std::size_t ch) const {
    const double f = grid_.frequencies_hz[ch];
    const double lower = f_lo_ - f;
    const double upper = f_hi_ - f;
    const Axis axis = graded_axis(lower, upper, kInnerCellFraction * bandwidth_, settings_.quadrature_points_per_axis);
    const std::size_t n = axis.edges.size() - 1;
    std::vector<double> mid(n), width(n), psd(n);
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) {
      mid[k] = 0.5 * (axis.edges[k] + axis.edges[k + 1]);
      width[k] = axis.edges[k + 1] - axis.edges[k];
      idx[k] = channel_index(f + mid[k]);
      psd[k] = psd_[idx[k]];
    }

    std::vector<double> h(n_seg_ + 1), b(n_seg_);
    const double* root0 = &root_[ch * (n_seg_ + 1)];
    const double* slope0 = &slope_[ch * n_seg_];
    const double phase_base = 2.0 * (f - fc_);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (psd[i] == 0.0) continue;
      const double* root1 = &root_[idx[i] * (n_seg_ + 1)];
      const double* slope1 = &slope_[idx[i] * n_seg_];
      for (std::size_t j = i; j < n; ++j) {
        if (psd[j] == 0.0) continue;
        const double x0 = axis.edges[i];
        const double y0 = axis.edges[j];
        const double wx = width[i];
        const double wy = width[j];
        const double inside = area_below(upper - x0 - y0, wx, wy) - area_below(lower - x0 - y0, wx, wy);
        if (inside <= 0.0) continue;
        const double f3 = f + mid[i] + mid[j];
        const std::size_t k3 = channel_index(f3);
        const double g3 = psd_[k3];
        if (g3 == 0.0) continue;

        const double* root2 = &root_[idx[j] * (n_seg_ + 1)];
        const double* slope2 = &slope_[idx[j] * n_seg_];
        const double* root3 = &root_[k3 * (n_seg_ + 1)];
        const double* slope3 = &slope_[k3 * n_seg_];
        for (std::size_t k = 0; k <= n_seg_; ++k) h[k] = root1[k] * root2[k] * root3[k] / root0[k];
        for (std::size_t k = 0; k < n_seg_; ++k) b[k] = slope1[k] + slope2[k] + slope3[k] - slope0[k];

        const double phi =
            -4.0 * M_PI * M_PI * mid[i] * mid[j] * (beta2c_ + M_PI * beta3_ * (mid[i] + mid[j] + phase_base));
        const double mu2 = link_function_squared(h, b, phi);
        const double weight = (i == j ? 1.0 : 2.0) * inside;
        sum += weight * psd[i] * psd[j] * g3 * mu2;
      }
    }
    const double g_nli = 16.0 / 27.0 * gamma_ * gamma_ * sum;
    const double p = g_nli * bandwidth_;
    if (!std::isfinite(p)) {
      std::ostringstream os;
      os << "nli: non-finite quadrature result for channel " << ch;
      throw NumericalError(os.str());
    }
    return p;
  }

 private:
  std::size_t channel_index(double f) const {
    const double pos = std::floor((f - f_lo_) / bandwidth_);
    if (pos <= 0.0) return 0;
    const auto k = static_cast<std::size_t>(pos);
    return std::min(k, n_ch_ - 1);
  }

  static double log_rho_at(const SpanSolution& span, std::size_t c, double z) {
    const auto& zs = span.z_m;
    auto it = std::upper_bound(zs.begin(), zs.end(), z);
    std::size_t hi = static_cast<std::size_t>(it - zs.begin());
    hi = std::clamp<std::size_t>(hi, 1, zs.size() - 1);
    const std::size_t lo = hi - 1;
    const double a = std::log(span.rho(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(lo)));
    const double bb = std::log(span.rho(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(hi)));
    const double t = (z - zs[lo]) / (zs[hi] - zs[lo]);
    return a + t * (bb - a);
  }

  // |sum_k Int_{z_k}^{z_k+1} h_k exp(b_k (z - z_k)) exp(j phi z) dz|^2
  double link_function_squared(const std::vector<double>& h, const std::vector<double>& b, double phi) const {
    const double step_re = std::cos(phi * dz_);
    const double step_im = std::sin(phi * dz_);
    double rot_re = 1.0, rot_im = 0.0;  // exp(j phi z_k)
    double acc_re = 0.0, acc_im = 0.0;
    for (std::size_t k = 0; k < n_seg_; ++k) {
      const double cr = b[k];
      const double ci = phi;
      double seg_re, seg_im;
      const double mag = std::hypot(cr, ci) * dz_;
      if (mag < 1e-3) {
        // h_k dz (1 + c dz/2 + (c dz)^2/6 + (c dz)^3/24)
        const double xr = cr * dz_, xi = ci * dz_;
        const double x2r = xr * xr - xi * xi, x2i = 2.0 * xr * xi;
        const double x3r = x2r * xr - x2i * xi, x3i = x2r * xi + x2i * xr;
        seg_re = h[k] * dz_ * (1.0 + xr / 2.0 + x2r / 6.0 + x3r / 24.0);
        seg_im = h[k] * dz_ * (xi / 2.0 + x2i / 6.0 + x3i / 24.0);
      } else {
        // (h_{k+1} e^{j phi dz} - h_k) / (b_k + j phi)
        const double nr = h[k + 1] * step_re - h[k];
        const double ni = h[k + 1] * step_im;
        const double den = cr * cr + ci * ci;
        seg_re = (nr * cr + ni * ci) / den;
        seg_im = (ni * cr - nr * ci) / den;
      }
      acc_re += rot_re * seg_re - rot_im * seg_im;
      acc_im += rot_re * seg_im + rot_im * seg_re;
      const double nr = rot_re * step_re - rot_im * step_im;
      rot_im = rot_re * step_im + rot_im * step_re;
      rot_re = nr;
    }
    return acc_re * acc_re + acc_im * acc_im;
  }

  const ChannelGrid& grid_;
  NliSettings settings_;
  std::size_t n_ch_ = 0;
  double bandwidth_ = 0.0;
  double f_lo_ = 0.0, f_hi_ = 0.0, fc_ = 0.0;
  double beta2c_ = 0.0, beta3_ = 0.0, gamma_ = 0.0;
  std::vector<double> psd_;
  std::size_t n_seg_ = 0;
  double dz_ = 0.0;
  std::vector<double> root_;
  std::vector<double> slope_;
};

}  // namespace

std::vector<double> normalized_profile(const SpanSolution& span, std::size_t channel) {
  if (channel >= static_cast<std::size_t>(span.rho.rows()))
    throw std::out_of_range("normalized_profile: channel " + std::to_string(channel) + " out of range");
  const auto row = span.rho.row(static_cast<Eigen::Index>(channel));
  return {row.begin(), row.end()};
}

double nli_power(const ChannelGrid& grid, const FibreSpec& fibre, const SpanSolution& span, std::size_t channel,
                 const NliSettings& settings) {
  if (channel >= grid.size()) throw std::out_of_range("nli_power: channel out of range");
  return NliIntegral(grid, fibre, span, settings).channel(channel);
}

double accumulate_nli(double per_span_nli_w, int n_spans, const NliSettings& settings) {
  if (n_spans < 1) throw ValidationError("accumulate_nli: n_spans must be at least 1");
  if (per_span_nli_w < 0.0) throw ValidationError("accumulate_nli: negative NLI power");
  if (settings.accumulation == AccumulationMode::incoherent) return n_spans * per_span_nli_w;
  if (settings.coherence_epsilon < 0.0) throw ValidationError("accumulate_nli: negative coherence epsilon");
  return per_span_nli_w * std::pow(static_cast<double>(n_spans), 1.0 + settings.coherence_epsilon);
}

std::vector<double> snr_nli(const ChannelGrid& grid, std::span<const double> total_nli_w) {
  if (total_nli_w.size() != grid.size()) throw ValidationError("snr_nli: one NLI value per channel required");
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (total_nli_w[i] < 0.0) throw ValidationError("snr_nli: negative NLI power");
    out[i] = total_nli_w[i] == 0.0 ? kNoNli : grid.launch_power_w[i] / total_nli_w[i];
  }
  return out;
}

NliResult compute_nli(const ChannelGrid& grid, const FibreSpec& fibre, const SpanSolution& span, int n_spans,
                      const NliSettings& settings, int threads) {
  if (settings.channel_subsampling < 1) throw ValidationError("nli: channel_subsampling must be >= 1");
  const NliIntegral integral(grid, fibre, span, settings);
  const std::size_t n = grid.size();
  const auto step = static_cast<std::size_t>(settings.channel_subsampling);
  // Every k-th channel plus the two next to each band edge, where NLI rolls
  // off too sharply for log-linear interpolation.
  std::set<std::size_t> picked;
  for (std::size_t i = 0; i < n; i += step) picked.insert(i);
  for (std::size_t e = 0; e < std::min<std::size_t>(3, n); ++e) {
    picked.insert(e);
    picked.insert(n - 1 - e);
  }
  const std::vector<std::size_t> evaluated(picked.begin(), picked.end());

  std::vector<double> values(evaluated.size());
  parallel_for(evaluated.size(), threads, [&](std::size_t k) { values[k] = integral.channel(evaluated[k]); });

  std::vector<double> per_span(n);
  for (std::size_t k = 0; k < evaluated.size(); ++k) {
    per_span[evaluated[k]] = values[k];
    if (k + 1 == evaluated.size()) break;
    const std::size_t a = evaluated[k], bnd = evaluated[k + 1];
    for (std::size_t i = a + 1; i < bnd; ++i) {
      const double t = static_cast<double>(i - a) / static_cast<double>(bnd - a);
      if (values[k] > 0.0 && values[k + 1] > 0.0) {
        per_span[i] = std::exp((1.0 - t) * std::log(values[k]) + t * std::log(values[k + 1]));
      } else {
        per_span[i] = (1.0 - t) * values[k] + t * values[k + 1];
      }
    }
  }

  NliResult result;
  result.per_channel_nli_power_w.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.per_channel_nli_power_w[i] = accumulate_nli(per_span[i], n_spans, settings);
  result.per_channel_snr_nli = snr_nli(grid, result.per_channel_nli_power_w);
  return result;
}

}  // namespace hybridlink
