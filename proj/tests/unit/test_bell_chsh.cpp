#include "bfc/bell_chsh.hpp"

#include <cmath>
#include <numbers>

#include "bfc/errors.hpp"
#include "doctest.h"

using namespace bfc;

namespace {

FringeScan noiseless_scan(double fixed, double v, double integration, int points) {
    FringeScan s;
    s.fixed_angle_deg = fixed;
    s.integration = integration;
    s.scan_angles_deg = angle_grid(0.0, 360.0, points);
    for (double a : s.scan_angles_deg) s.counts.push_back(std::llround(integration * fringe_rate(fixed, a, v)));
    return s;
}

}  // namespace

TEST_CASE("fringe law") {
    CHECK(fringe_rate(45.0, 45.0, 1.0) == doctest::Approx(1.0));
    CHECK(fringe_rate(0.0, 0.0, 1.0) == doctest::Approx(0.0));
    CHECK(fringe_rate(30.0, 17.0, 0.0) == doctest::Approx(0.5));
    // max/min contrast recovers the visibility
    const double hi = fringe_rate(45.0, 45.0, 0.9796);
    const double lo = fringe_rate(0.0, 0.0, 0.9796);
    CHECK((hi - lo) / (hi + lo) == doctest::Approx(0.9796));
    CHECK_THROWS_AS((void)fringe_rate(0.0, 0.0, 1.5), ValidationError);
}

TEST_CASE("angle grid") {
    const auto g = angle_grid(0.0, 360.0, 36);
    REQUIRE(g.size() == 36);
    CHECK(g[1] == doctest::Approx(10.0));
    CHECK(g.back() == doctest::Approx(350.0));
    CHECK_THROWS_AS((void)angle_grid(0.0, 1.0, 0), ValidationError);
}

TEST_CASE("fringe simulation") {
    const auto angles = angle_grid(0.0, 360.0, 36);
    SUBCASE("zero visibility is flat on average") {
        const auto s = simulate_fringe_scan(45.0, angles, 0.0, 1e6, std::uint64_t{3});
        for (auto c : s.counts) CHECK(std::abs(static_cast<double>(c) - 5e5) < 5.0 * std::sqrt(5e5));
    }
    SUBCASE("fixed seed is reproducible") {
        const auto a = simulate_fringe_scan(90.0, angles, 0.9, 800.0, std::uint64_t{11});
        const auto b = simulate_fringe_scan(90.0, angles, 0.9, 800.0, std::uint64_t{11});
        CHECK(a.counts == b.counts);
        const auto c = simulate_fringe_scan(90.0, angles, 0.9, 800.0, std::uint64_t{12});
        CHECK(a.counts != c.counts);
    }
    SUBCASE("fit recovers the visibility of a simulated scan") {
        for (double fixed : {45.0, 90.0, 135.0, 180.0}) {
            const auto s = simulate_fringe_scan(fixed, angles, 0.9796, 1e4, std::uint64_t{fixed > 0 ? 17u : 1u});
            CHECK(std::abs(fit_fringe(s).visibility - 0.9796) < 0.01);
        }
    }
    CHECK_THROWS_AS((void)simulate_fringe_scan(0.0, angles, 0.9, 0.0, std::uint64_t{1}), ValidationError);
}

TEST_CASE("fringe fit") {
    SUBCASE("noiseless data") {
        for (double v : {0.5, 0.9796}) {
            const auto fit = fit_fringe(noiseless_scan(90.0, v, 1e9, 36));
            CHECK(fit.visibility == doctest::Approx(v).epsilon(1e-6));
            CHECK(fit.phase_defined);
            CHECK(fit.offset == doctest::Approx(0.5e9).epsilon(1e-6));
        }
    }
    SUBCASE("phase follows the fixed analyzer") {
        // a + b cos(2φ2 + c): R ∝ 1 - V cos(2φ2 + 2φ1), so c = 2φ1 + 180°.
        const auto fit = fit_fringe(noiseless_scan(30.0, 0.9, 1e9, 36));
        const double c = std::remainder(fit.phase_deg - (60.0 + 180.0), 360.0);
        CHECK(std::abs(c) < 1e-4);
    }
    SUBCASE("flat counts") {
        FringeScan s = noiseless_scan(0.0, 0.0, 100.0, 12);
        const auto fit = fit_fringe(s);
        CHECK(fit.visibility == 0.0);
        CHECK_FALSE(fit.phase_defined);
    }
    SUBCASE("accidental subtraction raises visibility") {
        const auto s = noiseless_scan(45.0, 0.9, 1e6, 36);
        CHECK(fit_fringe(s, 20000.0).visibility > fit_fringe(s).visibility);
    }
    SUBCASE("malformed scans") {
        FringeScan s = noiseless_scan(0.0, 0.9, 100.0, 36);
        s.counts.pop_back();
        CHECK_THROWS_AS((void)fit_fringe(s), ValidationError);
        CHECK_THROWS_AS((void)fit_fringe(noiseless_scan(0.0, 0.9, 100.0, 5)), ValidationError);
        FringeScan narrow = noiseless_scan(0.0, 0.9, 100.0, 36);
        narrow.scan_angles_deg = angle_grid(0.0, 90.0, 36);
        CHECK_THROWS_AS((void)fit_fringe(narrow), ValidationError);
        CHECK_THROWS_AS((void)fit_fringe(noiseless_scan(0.0, 0.9, 100.0, 36), 1e6), RuntimeError);
    }
}

TEST_CASE("correlation function") {
    // ideal V = 1, φ1 = 45°, φ2 = 112.5°
    const double e = -std::cos(2.0 * (45.0 + 112.5) * std::numbers::pi / 180.0);
    CHECK(e == doctest::Approx(-1.0 / std::numbers::sqrt2));
    const double n = 1e6;
    CoincidenceSet c{n * fringe_rate(45.0, 112.5, 1.0), n * fringe_rate(45.0, 202.5, 1.0),
                     n * fringe_rate(135.0, 112.5, 1.0), n * fringe_rate(135.0, 202.5, 1.0)};
    CHECK(correlation_E(c) == doctest::Approx(e).epsilon(1e-12));

    CHECK(correlation_E({5, 5, 5, 5}) == 0.0);
    CHECK(correlation_E_sigma({5, 5, 5, 5}) == doctest::Approx(std::sqrt(1.0 / 20.0)));
    CHECK(correlation_E_sigma({10, 0, 0, 0}) == 0.0);
    CHECK_THROWS_AS((void)correlation_E({0, 0, 0, 0}), ValidationError);
}

TEST_CASE("CHSH S") {
    CHECK(s_chsh_from_visibility(1.0).s_value == doctest::Approx(2.0 * std::numbers::sqrt2).epsilon(1e-12));
    CHECK(s_chsh_from_visibility(0.0).s_value == 0.0);
    CHECK(std::abs(s_chsh_from_visibility(0.9796).s_value - 2.771) < 0.002);
    CHECK(std::abs(s_chsh_from_visibility(0.9497).s_value - 2.686) < 0.002);

    // Analyzer settings beyond the optimum cannot exceed Tsirelson's bound.
    for (double a = 0.0; a < 180.0; a += 22.5)
        for (double b = 0.0; b < 180.0; b += 22.5)
            CHECK(s_chsh_from_visibility(1.0, {a, a + 45.0, b, b + 45.0}).s_value <= 2.0 * std::numbers::sqrt2 + 1e-12);

    SUBCASE("sigma propagation") {
        const auto r = s_chsh({0.7, -0.7, 0.7, 0.7}, {0.01, 0.01, 0.01, 0.01});
        CHECK(r.s_value == doctest::Approx(2.8));
        CHECK(r.s_sigma == doctest::Approx(0.02));
        REQUIRE(r.violation_sigmas.has_value());
        CHECK(*r.violation_sigmas == doctest::Approx(40.0));
    }
    SUBCASE("counts path at the default integration") {
        std::mt19937_64 rng(42);
        const auto counts = simulate_chsh_counts(0.9497, ChshAngles{}, 800.0, rng);
        const auto r = s_chsh_from_counts(counts);
        CHECK(std::abs(r.s_value - 2.686) < 5.0 * r.s_sigma);
        CHECK(r.s_sigma == doctest::Approx(0.037).epsilon(0.15));
    }
    CHECK_THROWS_AS((void)s_chsh({0.1, NAN, 0.1, 0.1}), ValidationError);
    CHECK_THROWS_AS((void)s_chsh({0.1, 0.1, 0.1, 0.1}, {-1.0, 0.0, 0.0, 0.0}), ValidationError);
}

TEST_CASE("fringe S and violation significance") {
    CHECK(s_fringe_from_visibility(1.0) == doctest::Approx(2.828).epsilon(2e-4));
    CHECK(s_fringe_from_visibility(0.9796) == doctest::Approx(2.7707).epsilon(1e-4));
    CHECK(s_fringe_from_visibility(1.0 / std::numbers::sqrt2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(*violation_sigmas(2.686, 0.037) - 18.5) < 0.1);
    CHECK_FALSE(violation_sigmas(1.9, 0.03).has_value());
    CHECK_FALSE(violation_sigmas(2.5, 0.0).has_value());
    CHECK_THROWS_AS((void)s_fringe_from_visibility(-0.1), ValidationError);
}
