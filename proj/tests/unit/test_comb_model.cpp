#include "bfc/comb_model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "bfc/config.hpp"
#include "bfc/errors.hpp"
#include "doctest.h"

using namespace bfc;

TEST_CASE("round trip time is the reciprocal free spectral range") {
    CHECK(round_trip_time(CavitySpec(45.32e9, 1.56e9)) == doctest::Approx(22.07).epsilon(5e-4));
    CHECK(round_trip_time(CavitySpec(5.03e9, 0.46e9)) == doctest::Approx(198.8).epsilon(1e-4));
    CHECK(round_trip_time(CavitySpec(1e12, 1e9)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("presets reproduce derived cavity constants") {
    const CavitySpec c45 = preset_cavity("45ghz");
    CHECK(c45.fsr_hz() == 45.32e9);
    CHECK(c45.linewidth_fwhm_hz() == 1.56e9);
    CHECK(c45.finesse() == doctest::Approx(29.05).epsilon(1e-3));
    CHECK(preset_cavity("15ghz").finesse() == doctest::Approx(11.14).epsilon(1e-3));
    CHECK(preset_cavity("5ghz").finesse() == doctest::Approx(10.93).epsilon(1e-3));

    // ΔωΔT = π/F
    for (const auto& p : cavity_presets()) {
        const CavitySpec c = preset_cavity(p.name);
        const double product = c.half_width_rad_s() * c.round_trip_ps() * 1e-12;
        CHECK(product == doctest::Approx(std::numbers::pi / c.finesse()).epsilon(1e-12));
        CHECK(c.decay_per_round_trip() == doctest::Approx(product).epsilon(1e-12));
    }
}

TEST_CASE("cavity invariants are enforced") {
    CHECK_THROWS_AS(CavitySpec(1e9, 2e9), ValidationError);
    CHECK_THROWS_AS(CavitySpec(1e9, 1e9), ValidationError);
    CHECK_THROWS_AS(CavitySpec(1e9, 0.0), ValidationError);
    CHECK_THROWS_AS(CavitySpec(-1e9, -2e9), ValidationError);
    CHECK_THROWS_AS(CavitySpec(NAN, 1e9), ValidationError);
    CHECK_THROWS_AS((void)find_preset("30ghz"), ValidationError);
}

TEST_CASE("Lorentzian bin lineshape") {
    const double dw = 3.0e9;
    CHECK(bin_lineshape(0.0, dw) == doctest::Approx(1.0 / (dw * dw)));
    CHECK(bin_lineshape(dw, dw) == doctest::Approx(0.5 * bin_lineshape(0.0, dw)));
    CHECK(bin_lineshape(3.7 * dw, dw) == bin_lineshape(-3.7 * dw, dw));
}

TEST_CASE("envelopes are 1/2 at half the phase-matching bandwidth") {
    for (Envelope e : {Envelope::gaussian, Envelope::sinc_squared}) {
        SourceSpec s;
        s.envelope_shape = e;
        CHECK(s.envelope(0.0) == doctest::Approx(1.0));
        CHECK(s.envelope(0.5 * s.phase_matching_fwhm_hz) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.envelope(-0.5 * s.phase_matching_fwhm_hz) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(envelope_from_string(to_string(e)) == e);
    }
    CHECK_THROWS_AS((void)envelope_from_string("triangle"), ValidationError);
}

TEST_CASE("comb weights") {
    const CavitySpec c45 = preset_cavity("45ghz");

    SUBCASE("single bin") {
        const auto comb = build_comb(c45, SourceSpec{}, 0);
        REQUIRE(comb.bin_weights.size() == 1);
        CHECK(comb.weight(0) == 1.0);
    }
    SUBCASE("gaussian ratio") {
        SourceSpec s;
        s.envelope_shape = Envelope::gaussian;
        const auto comb = build_comb(c45, s, 30);
        const double expected = std::exp(-4.0 * std::numbers::ln2 * 45.32 * 45.32 / (245.0 * 245.0));
        CHECK(comb.weight(1) / comb.weight(0) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(expected == doctest::Approx(0.9094).epsilon(1e-4));
    }
    SUBCASE("symmetry and normalization for every preset and shape") {
        for (const auto& p : cavity_presets()) {
            for (Envelope e : {Envelope::gaussian, Envelope::sinc_squared}) {
                SourceSpec s;
                s.envelope_shape = e;
                const CavitySpec c = preset_cavity(p.name);
                const auto comb = build_comb(c, s, default_n_max(c, s));
                const double total = std::accumulate(comb.bin_weights.begin(), comb.bin_weights.end(), 0.0);
                CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
                for (int m = 1; m <= comb.n_max; ++m) CHECK(comb.weight(m) == comb.weight(-m));
                for (double w : comb.bin_weights) CHECK(w >= 0.0);
            }
        }
    }
    SUBCASE("rejections and warnings") {
        CHECK_THROWS_AS((void)build_comb(c45, SourceSpec{}, -1), ValidationError);
        SourceSpec bad;
        bad.phase_matching_fwhm_hz = 0.0;
        CHECK_THROWS_AS((void)build_comb(c45, bad, 3), ValidationError);
        const auto comb = build_comb(c45, SourceSpec{}, 3);
        CHECK_THROWS_AS((void)comb.weight(4), ValidationError);

        std::vector<std::string> warnings;
        (void)build_comb(c45, SourceSpec{}, 16, &warnings);
        CHECK(warnings.empty());
        (void)build_comb(c45, SourceSpec{}, 40, &warnings);
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("default bin counts cover three phase-matching bandwidths") {
    const SourceSpec s;
    CHECK(default_n_max(preset_cavity("45ghz"), s) == 16);
    CHECK(default_n_max(preset_cavity("15ghz"), s) == 48);
    CHECK(default_n_max(preset_cavity("5ghz"), s) == 146);
}

TEST_CASE("temporal envelope") {
    const CavitySpec c45 = preset_cavity("45ghz");
    const auto single = build_comb(c45, SourceSpec{}, 0);
    CHECK(temporal_envelope(single, 0) == 1.0);

    const auto comb = build_comb(c45, SourceSpec{}, 30);
    double sigma = 1.0;
    for (int k = 1; k <= 30; ++k) sigma += 2.0 * std::exp(-2.0 * std::numbers::pi * k / c45.finesse());
    CHECK(temporal_envelope(comb, 0) == doctest::Approx(1.0 / sigma).epsilon(1e-13));

    double total = 0.0;
    for (int n = -30; n <= 30; ++n) total += temporal_envelope(comb, n);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));

    const double ratio = std::exp(-2.0 * std::numbers::pi / c45.finesse());
    for (int n = 0; n < 30; ++n)
        CHECK(temporal_envelope(comb, n + 1) / temporal_envelope(comb, n) == doctest::Approx(ratio).epsilon(1e-12));
    CHECK_THROWS_AS((void)temporal_envelope(comb, 31), ValidationError);
}
