#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hybridlink/errors.hpp"
#include "hybridlink/nli_engine.hpp"
#include "hybridlink/raman_solver.hpp"
#include "ssf_oracle.hpp"
#include "test_support.hpp"

using namespace hybridlink;
using test_support::rel_err;
using oracles::ManakovOracle;

namespace {

SpanSolution unpumped_span(const ChannelGrid& grid, const FibreSpec& fibre) {
  SolverSettings s;
  return solve_span(grid, fibre, {}, std::vector<double>(grid.size(), 0.0), s, 300.0);
}

}  // namespace

TEST_SUITE("normalized_profile") {
  TEST_CASE("matches rho and the exponential of a pure-loss span") {
    const auto grid = build_channel_grid(1571e-9, 3, 100e9, 3e-3);
    const auto fibre = test_support::simple_fibre();
    const auto span = unpumped_span(grid, fibre);
    const double a = db_per_km_to_per_m(0.2);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const auto rho = normalized_profile(span, ch);
      REQUIRE(rho.size() == span.n_z());
      CHECK(rho.front() == 1.0);
      for (std::size_t k = 0; k < rho.size(); ++k) CHECK(rel_err(rho[k], std::exp(-a * span.z_m[k])) < 1e-10);
    }
  }
}

TEST_SUITE("nli_power") {
  TEST_CASE("zero launch power gives zero NLI and an infinite SNR marker") {
    auto grid = build_channel_grid(1571e-9, 3, 100e9, 3e-3);
    const auto fibre = test_support::simple_fibre();
    const auto span = unpumped_span(grid, fibre);
    grid.launch_power_w.assign(3, 0.0);
    NliSettings s;
    s.quadrature_points_per_axis = 64;
    CHECK(nli_power(grid, fibre, span, 1, s) == 0.0);
    const auto snr = snr_nli(grid, std::vector<double>(3, 0.0));
    CHECK(snr[0] == kNoNli);
  }

  TEST_CASE("doubling every channel power scales NLI by eight") {
    const auto fibre = test_support::simple_fibre();
    const auto g1 = build_channel_grid(1571e-9, 5, 100e9, dbm_to_watt(5.0));
    const auto g2 = with_total_power(g1, 2.0 * g1.total_power_w());
    // Same normalized profile: a pure-loss span is power independent.
    const auto span = unpumped_span(g1, fibre);
    NliSettings s;
    s.quadrature_points_per_axis = 96;
    for (std::size_t ch : {0u, 2u, 4u}) {
      const double a = nli_power(g1, fibre, span, ch, s);
      const double b = nli_power(g2, fibre, span, ch, s);
      CHECK(a > 0.0);
      CHECK(rel_err(b / a, 8.0) < 1e-3);
    }
  }

  TEST_CASE("single channel against a split-step Manakov simulation") {
    auto fibre = test_support::simple_fibre(57.0, 0.2);
    fibre.dispersion_slope_s_per_m3 = 0.0;
    const double bandwidth = 100e9;
    const double power = dbm_to_watt(3.0);
    const auto grid = build_channel_grid(fibre.reference_wavelength_m, 1, bandwidth, power);
    const auto span = unpumped_span(grid, fibre);
    NliSettings s;  // reference quadrature
    const double engine_psd = nli_power(grid, fibre, span, 0, s) / bandwidth;

    // beta2 = -D lambda^2 / (2 pi c), written out independently.
    const double lambda = 1550e-9, c = 299792458.0;
    const double beta2 = -21e-6 * lambda * lambda / (2.0 * M_PI * c);
    ManakovOracle oracle(4096, 300e9);
    const double oracle_psd = oracle.centre_psd(power, bandwidth, beta2, db_per_km_to_per_m(0.2), 0.55e-3, 57e3, 10.0,
                                                8, 5e9, 20261019);
    const double diff_db = linear_to_db(engine_psd / oracle_psd);
    MESSAGE("engine " << engine_psd << " W/Hz, split-step " << oracle_psd << " W/Hz, difference " << diff_db << " dB");
    CHECK(std::abs(diff_db) < 0.5);
  }

  TEST_CASE("quadrature self-convergence") {
    const auto s0 = with_fidelity(load_scenario(test_support::config_path("paper_hybrid.cfg")), Fidelity::fast);
    const auto span = solve_span(s0.grid, s0.fibre, s0.pumps, std::vector<double>(s0.grid.size(), 0.0), s0.solver, 300.0);
    NliSettings coarse, fine;
    coarse.quadrature_points_per_axis = 200;
    fine.quadrature_points_per_axis = 400;
    for (std::size_t ch : {std::size_t{0}, s0.grid.size() / 2, s0.grid.size() - 1}) {
      const double a = nli_power(s0.grid, s0.fibre, span, ch, coarse);
      const double b = nli_power(s0.grid, s0.fibre, span, ch, fine);
      CHECK(rel_err(a, b) < 5e-3);
    }
  }
}

TEST_SUITE("accumulation") {
  TEST_CASE("incoherent and coherent-epsilon spans") {
    NliSettings s;
    CHECK(accumulate_nli(1.0, 117, s) == 117.0);
    CHECK(accumulate_nli(2.5e-9, 1, s) == 2.5e-9);
    s.accumulation = AccumulationMode::coherent_epsilon;
    s.coherence_epsilon = 0.05;
    CHECK(accumulate_nli(1.0, 117, s) == doctest::Approx(148.46).epsilon(1e-4));
    s.coherence_epsilon = 0.0;
    CHECK(accumulate_nli(1.0, 117, s) == doctest::Approx(117.0));
    CHECK_THROWS_AS(accumulate_nli(1.0, 0, s), ValidationError);
    CHECK_THROWS_AS(accumulate_nli(-1.0, 3, s), ValidationError);
  }

  TEST_CASE("snr_nli is launch power over NLI") {
    const auto grid = build_channel_grid(1571e-9, 1, 100e9, 1e-3);
    const auto snr = snr_nli(grid, std::vector<double>{1e-6});
    CHECK(linear_to_db(snr[0]) == doctest::Approx(30.0));
    CHECK_THROWS_AS(snr_nli(grid, std::vector<double>{-1e-6}), ValidationError);
  }
}

TEST_SUITE("compute_nli") {
  TEST_CASE("fast and reference fidelity agree within 0.3 dB") {
    const auto base = load_scenario(test_support::config_path("paper_hybrid.cfg"));
    const auto fast = with_fidelity(base, Fidelity::fast);
    const auto ref = with_fidelity(base, Fidelity::reference);
    const auto span = solve_span(ref.grid, ref.fibre, ref.pumps, std::vector<double>(ref.grid.size(), 0.0), ref.solver,
                                 300.0);
    const auto a = compute_nli(fast.grid, fast.fibre, span, fast.n_spans, fast.nli, 2);
    const auto b = compute_nli(ref.grid, ref.fibre, span, ref.n_spans, ref.nli, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.per_channel_snr_nli.size(); ++i)
      worst = std::max(worst, std::abs(linear_to_db(a.per_channel_snr_nli[i] / b.per_channel_snr_nli[i])));
    MESSAGE("largest fast/reference SNR_NLI difference " << worst << " dB");
    CHECK(worst < 0.3);
  }

  TEST_CASE("deterministic and independent of thread count") {
    const auto s = with_fidelity(load_scenario(test_support::config_path("paper_hybrid.cfg")), Fidelity::fast);
    const auto span = solve_span(s.grid, s.fibre, s.pumps, std::vector<double>(s.grid.size(), 0.0), s.solver, 300.0);
    const auto a = compute_nli(s.grid, s.fibre, span, s.n_spans, s.nli, 1);
    const auto b = compute_nli(s.grid, s.fibre, span, s.n_spans, s.nli, 3);
    const auto c = compute_nli(s.grid, s.fibre, span, s.n_spans, s.nli, 1);
    CHECK(a.per_channel_nli_power_w == b.per_channel_nli_power_w);
    CHECK(a.per_channel_nli_power_w == c.per_channel_nli_power_w);
  }

  TEST_CASE("accumulates the per-span value over the link") {
    auto s = test_support::simple_scenario(4, 10.0, 10);
    const auto span = unpumped_span(s.grid, s.fibre);
    s.nli.quadrature_points_per_axis = 64;
    const auto link = compute_nli(s.grid, s.fibre, span, 10, s.nli);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(rel_err(link.per_channel_nli_power_w[i], 10.0 * nli_power(s.grid, s.fibre, span, i, s.nli)) < 1e-12);
  }
}
