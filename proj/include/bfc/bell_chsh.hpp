#pragma once

// Post-selected polarization entanglement: fringe scans with Poisson
// counting noise, sinusoidal fringe fits, and CHSH statistics.
//
// Fringe law for the |HV> + |VH> post-selected state with linear analyzers
// at φ1, φ2:  R = (1/2)·[1 - V·cos(2(φ1 + φ2))],  so E(φ1, φ2) = -V·cos(2(φ1 + φ2)).

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace bfc {

[[nodiscard]] double fringe_rate(double phi1_deg, double phi2_deg, double visibility);

struct FringeScan {
    double fixed_angle_deg = 0.0;
    std::vector<double> scan_angles_deg;
    std::vector<std::int64_t> counts;
    double integration = 0.0;  // expected counts at the fringe maximum
};

[[nodiscard]] FringeScan simulate_fringe_scan(double fixed_deg, std::span<const double> scan_deg, double visibility,
                                              double integration, std::mt19937_64& rng);
[[nodiscard]] FringeScan simulate_fringe_scan(double fixed_deg, std::span<const double> scan_deg, double visibility,
                                              double integration, std::uint64_t seed);

/// Evenly spaced angles [start, stop) in `count` steps.
[[nodiscard]] std::vector<double> angle_grid(double start_deg, double stop_deg, int count);

struct FringeFit {
    double visibility = 0.0;
    double phase_deg = 0.0;  // c in a + b·cos(2φ2 + c), degrees
    double amplitude = 0.0;  // b ≥ 0
    double offset = 0.0;     // a
    bool phase_defined = true;
    double residual_rms = 0.0;
};

/// Linear least squares fit of a + b·cos(2φ2 + c). `accidental_counts` is
/// subtracted from every sample first.
[[nodiscard]] FringeFit fit_fringe(const FringeScan& scan, double accidental_counts = 0.0);

/// Coincidences at (φ1, φ2), (φ1, φ2+90°), (φ1+90°, φ2), (φ1+90°, φ2+90°).
struct CoincidenceSet {
    double parallel = 0.0;        // C(φ1, φ2)
    double cross_second = 0.0;    // C(φ1, φ2⊥)
    double cross_first = 0.0;     // C(φ1⊥, φ2)
    double orthogonal = 0.0;      // C(φ1⊥, φ2⊥)

    [[nodiscard]] double total() const noexcept { return parallel + cross_second + cross_first + orthogonal; }
};

[[nodiscard]] double correlation_E(const CoincidenceSet& counts);
/// Poisson standard error of correlation_E: sqrt((1 - E²) / total).
[[nodiscard]] double correlation_E_sigma(const CoincidenceSet& counts);

/// Analyzer settings φ1, φ1', φ2, φ2' in degrees.
struct ChshAngles {
    double a = 90.0;
    double a_prime = 45.0;
    double b = 112.5;
    double b_prime = 157.5;
};

struct ChshResult {
    /// E(a,b), E(a,b'), E(a',b), E(a',b')
    std::array<double, 4> correlations{};
    std::array<double, 4> correlation_sigmas{};
    double s_value = 0.0;
    double s_sigma = 0.0;
    /// (S - 2)/σ_S when S > 2 and σ_S > 0.
    std::optional<double> violation_sigmas;
};

/// S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')| with σ_S from independent per-E errors.
[[nodiscard]] ChshResult s_chsh(const std::array<double, 4>& correlations,
                                const std::array<double, 4>& sigmas = {});
/// Noiseless path: correlations from the fringe law at visibility v.
[[nodiscard]] ChshResult s_chsh_from_visibility(double visibility, const ChshAngles& angles = {});
/// Counts path: four coincidence sets in the order of ChshResult::correlations.
[[nodiscard]] ChshResult s_chsh_from_counts(const std::array<CoincidenceSet, 4>& counts);
/// Draws Poisson counts for all sixteen analyzer settings.
[[nodiscard]] std::array<CoincidenceSet, 4> simulate_chsh_counts(double visibility, const ChshAngles& angles,
                                                                 double integration, std::mt19937_64& rng);

[[nodiscard]] double s_fringe_from_visibility(double v_mean);
[[nodiscard]] std::optional<double> violation_sigmas(double s_value, double s_sigma);

}  // namespace bfc
