#pragma once

// Hong-Ou-Mandel interferometry of a biphoton frequency comb.
//
// For a frequency-anticorrelated pure pair state with spectral intensity
// S(Ω), the normalized coincidence rate at relative delay τ is
//
//     C(τ) = 1 - V(τ),   V(τ) = ∫ S(Ω) cos(2Ωτ) dΩ / ∫ S(Ω) dΩ.
//
// The comb makes V(τ) revive every ΔT/2. At revival n the lineshape alone
// sets the visibility, which for a Lorentzian amplitude bin is
// V_n = e^{-x}(1 + x) with x = |n|·ΔωΔT = |n|·π/F.

#include <span>
#include <string>
#include <vector>

#include "bfc/comb_model.hpp"

namespace bfc {

struct HomOptions {
    /// Quadrature points per cavity linewidth (FWHM). Values below 8 are rejected.
    int points_per_linewidth = 32;
    /// Uniform accidental fraction a; scales visibility by (1 - a). 0 is noiseless.
    double accidental_fraction = 0.0;
};

/// Default accidental fraction when accidentals are switched on.
inline constexpr double kDefaultAccidentalFraction = 0.015;

struct HomTrace {
    std::vector<double> delays_ps;
    std::vector<double> coincidence;
    // generating comb parameters
    int n_max = 0;
    double fsr_rad_s = 0.0;
    double half_width_rad_s = 0.0;

    [[nodiscard]] double revival_spacing_ps() const;
};

struct RevivalRecord {
    int n = 0;
    double center_ps = 0.0;
    double visibility = 0.0;
};

struct RevivalScan {
    std::vector<RevivalRecord> records;
    std::vector<std::string> warnings;
};

/// Symmetric delay grid k·step for |k·step| ≤ window, always containing 0.
[[nodiscard]] std::vector<double> delay_grid(double window_ps, double step_ps);

[[nodiscard]] HomTrace simulate_hom_trace(const CombSpectrum& comb, std::span<const double> delays_ps,
                                          const HomOptions& options = {});

/// V_n = exp(-|n|π/F)·(1 + |n|π/F)
[[nodiscard]] double dip_visibility_closed_form(int n, const CavitySpec& cavity);
[[nodiscard]] double dip_visibility_from_decay(double decay_parameter);

/// Solves v = e^{-x}(1 + x) for x ≥ 0. Rejects v outside (0, 1].
[[nodiscard]] double visibility_to_decay_parameter(double v);

[[nodiscard]] RevivalScan locate_revivals(const HomTrace& trace);

/// Base-to-base width of the central dip: distance between the first
/// delays on either side of τ = 0 where visibility drops below `threshold`.
[[nodiscard]] double central_dip_width(const HomTrace& trace, double threshold = 0.01);

}  // namespace bfc
