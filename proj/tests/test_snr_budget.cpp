#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "hybridlink/errors.hpp"
#include "hybridlink/snr_budget.hpp"
#include "test_support.hpp"

using namespace hybridlink;
using test_support::rel_err;

TEST_SUITE("edfa") {
  TEST_CASE("gain restores launch power") {
    CHECK(edfa_gain(1e-3, 1e-3) == 1.0);
    CHECK(edfa_gain(1e-3, 1e-4) == doctest::Approx(10.0));
    CHECK_THROWS_AS(edfa_gain(1e-3, 0.0), NumericalError);

    const auto grid = build_channel_grid(1571e-9, 3, 100e9, 3e-3);
    const auto fibre = test_support::simple_fibre();
    const auto span = solve_span(grid, fibre, {}, std::vector<double>(3, 0.0), SolverSettings{}, 300.0);
    for (double g : edfa_gain(span, grid)) CHECK(linear_to_db(g) == doctest::Approx(11.4).epsilon(1e-9));

    auto lossless = fibre;
    lossless.attenuation_per_m = test_support::flat_attenuation(0.0);
    const auto flat = solve_span(grid, lossless, {}, std::vector<double>(3, 0.0), SolverSettings{}, 300.0);
    for (double g : edfa_gain(flat, grid)) CHECK(g == 1.0);
  }

  TEST_CASE("ASE formula") {
    CHECK(edfa_ase(1.0, 5.0, 190.83e12, 100e9) == 0.0);
    const double h = 6.62607015e-34;
    const double g = std::pow(10.0, 1.14);
    const double expected = 2.0 * (g - 1.0) * std::pow(10.0, 0.5) / 2.0 * h * 190.83e12 * 100e9;
    const double ase = edfa_ase(g, 5.0, 190.83e12, 100e9);
    CHECK(rel_err(ase, expected) < 1e-12);
    CHECK(ase == doctest::Approx(5.1e-7).epsilon(0.01));
    CHECK(watt_to_dbm(ase) == doctest::Approx(-32.9).epsilon(0.002));
    CHECK(edfa_ase(g, 8.0, 190.83e12, 100e9) / ase == doctest::Approx(std::pow(10.0, 0.3)));
    CHECK_THROWS_AS(edfa_ase(0.5, 5.0, 190e12, 100e9), ValidationError);
  }

  TEST_CASE("hybrid ASE") {
    CHECK(hybrid_ase(5.0, 0.0, 3e-7) == 3e-7);
    CHECK(hybrid_ase(2.0, 1e-6, 0.0) == doctest::Approx(2e-6));
    CHECK_THROWS_AS(hybrid_ase(2.0, -1e-6, 0.0), ValidationError);
  }
}

TEST_SUITE("snr and throughput") {
  TEST_CASE("harmonic combination") {
    CHECK(linear_to_db(snr_total(100.0, 100.0)) == doctest::Approx(16.99).epsilon(1e-3));
    CHECK(linear_to_db(snr_total(db_to_linear(14.0), 100.0)) == doctest::Approx(13.03).epsilon(1e-3));
    CHECK(snr_total(42.0, kNoNli) == 42.0);
    CHECK(snr_total(kNoNli, 42.0) == 42.0);
    CHECK(snr_total(kNoNli, kNoNli) == kNoNli);
  }

  TEST_CASE("property: commutative, monotone, bounded by each term") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 40.0);
    for (int i = 0; i < 1000; ++i) {
      const double a = db_to_linear(u(rng)), b = db_to_linear(u(rng));
      const double s = snr_total(a, b);
      CHECK(s == snr_total(b, a));
      CHECK(s <= std::min(a, b));
      CHECK(snr_total(a * 1.01, b) > s);
      CHECK(snr_total(a, b * 1.01) > s);
    }
  }

  TEST_CASE("throughput examples") {
    CHECK(throughput(std::vector<double>(105, 0.0), 100e9).total_bps == 0.0);
    const std::vector<double> flat(105, db_to_linear(17.0));
    const auto t = throughput(flat, 100e9);
    CHECK(t.total_bps / 1e12 == doctest::Approx(119.2).epsilon(1e-3));
    CHECK(t.spectral_efficiency.size() == 105);
    CHECK(rel_err(t.total_bps, 100e9 * 105 * 2.0 * std::log2(1.0 + db_to_linear(17.0))) < 1e-12);
    CHECK_THROWS_AS(throughput(std::vector<double>{-1.0}, 100e9), ValidationError);
  }

  TEST_CASE("property: throughput is monotone in every SNR") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    std::vector<double> snr(20);
    for (auto& s : snr) s = db_to_linear(u(rng));
    const double base = throughput(snr, 100e9).total_bps;
    for (std::size_t i = 0; i < snr.size(); ++i) {
      auto up = snr;
      up[i] *= 1.1;
      CHECK(throughput(up, 100e9).total_bps > base);
    }
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("EDFA-only flat-loss chain matches the closed-form SNR_ASE") {
    for (int n : {1, 10, 117}) {
      for (auto mode : {SpanMode::single_span_reuse, SpanMode::chain}) {
        if (mode == SpanMode::chain && n == 117) continue;  // covered by reuse; chain is slow at this length
        auto s = test_support::simple_scenario(5, 10.0, n, 5.0);
        s.solver.span_mode = mode;
        s.nli.quadrature_points_per_axis = 32;
        const auto ev = evaluate_link(s);
        const double g = std::pow(10.0, 1.14);
        const double nsp = std::pow(10.0, 0.5) / 2.0;
        for (std::size_t i = 0; i < s.grid.size(); ++i) {
          const double p = s.grid.launch_power_w[i];
          const double expected = p / (n * 2.0 * (g - 1.0) * nsp * 6.62607015e-34 * s.grid.frequencies_hz[i] * 100e9);
          CHECK(rel_err(ev.result.per_channel[i].snr_ase, expected) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("result invariants") {
    auto s = test_support::simple_scenario(7, 12.0, 20, 5.0);
    s.nli.quadrature_points_per_axis = 48;
    const auto ev = evaluate_link(s);
    double sum = 0.0;
    for (const auto& c : ev.result.per_channel) {
      CHECK(c.snr_total <= std::min(c.snr_nli, c.snr_ase));
      sum += c.spectral_efficiency;
    }
    CHECK(rel_err(ev.result.total_throughput_bps, 100e9 * sum) < 1e-9);
    CHECK(rel_err(ev.result.total_launch_power_w, dbm_to_watt(12.0)) < 1e-12);
  }

  TEST_CASE("example hybrid link: EDFA gain dips where Raman gain peaks; Raman ASE dominates there") {
    const auto s = with_fidelity(load_scenario(test_support::config_path("paper_hybrid.cfg")), Fidelity::fast);
    const auto prop = propagate_link(s);
    const auto& g = prop.edfa_gain;
    const auto min_it = std::min_element(g.begin(), g.end());
    const auto i_min = static_cast<std::size_t>(min_it - g.begin());
    const double wl_min = frequency_to_wavelength(s.grid.frequencies_hz[i_min]) * 1e9;
    MESSAGE("smallest EDFA gain " << linear_to_db(*min_it) << " dB at " << wl_min << " nm");
    CHECK(wl_min > 1567.5);
    CHECK(wl_min < 1594.0);
    CHECK(prop.raman_ase_per_span[i_min] > prop.edfa_ase_per_span[i_min]);

    auto nearest = [&](double nm) {
      std::size_t best = 0;
      for (std::size_t i = 0; i < s.grid.size(); ++i)
        if (std::abs(frequency_to_wavelength(s.grid.frequencies_hz[i]) * 1e9 - nm) <
            std::abs(frequency_to_wavelength(s.grid.frequencies_hz[best]) * 1e9 - nm))
          best = i;
      return best;
    };
    // Short end of the C-band: lumped stage dominates.
    const std::size_t c_edge = nearest(1530.0);
    CHECK(prop.edfa_ase_per_span[c_edge] > prop.raman_ase_per_span[c_edge]);
    // Mid C-band sits close to the crossover in this model (about 1543 nm).
    const std::size_t mid_c = nearest(1547.5);
    MESSAGE("mid C-band Raman/EDFA ASE ratio " << prop.raman_ase_per_span[mid_c] / prop.edfa_ase_per_span[mid_c]);
    WARN(prop.edfa_ase_per_span[mid_c] > prop.raman_ase_per_span[mid_c]);
  }
}
