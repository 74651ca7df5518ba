#pragma once

// Biphoton frequency comb state model.
//
// A broadband SPDC pair spectrum is carved by a Fabry-Perot cavity into
// 2N+1 Lorentzian frequency bins spaced by the free spectral range. Bin m
// carries the relative intensity weight of the phase-matching envelope at
// detuning m * FSR. All public quantities are in Hz / ps; angular
// frequencies (rad/s) are exposed only where the physics needs them.

#include <numbers>
#include <string>
#include <vector>

namespace bfc {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

/// Fabry-Perot filter cavity: free spectral range and resonance FWHM.
class CavitySpec {
public:
    /// Throws ValidationError unless fsr_hz > linewidth_fwhm_hz > 0.
    CavitySpec(double fsr_hz, double linewidth_fwhm_hz, std::string label = {});

    [[nodiscard]] double fsr_hz() const noexcept { return fsr_hz_; }
    [[nodiscard]] double linewidth_fwhm_hz() const noexcept { return linewidth_hz_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }

    [[nodiscard]] double finesse() const noexcept { return fsr_hz_ / linewidth_hz_; }
    [[nodiscard]] double round_trip_ps() const noexcept { return 1e12 / fsr_hz_; }
    /// ΔΩ = 2π·FSR
    [[nodiscard]] double fsr_rad_s() const noexcept { return 2.0 * std::numbers::pi * fsr_hz_; }
    /// Δω, the Lorentzian half width at half maximum in rad/s (FWHM = 2Δω).
    [[nodiscard]] double half_width_rad_s() const noexcept { return std::numbers::pi * linewidth_hz_; }
    /// ΔωΔT, which reduces to π/F.
    [[nodiscard]] double decay_per_round_trip() const noexcept { return std::numbers::pi / finesse(); }

    bool operator==(const CavitySpec&) const = default;

private:
    double fsr_hz_;
    double linewidth_hz_;
    std::string label_;
};

enum class Envelope { gaussian, sinc_squared };

[[nodiscard]] const char* to_string(Envelope e) noexcept;
/// Accepts "gaussian" and "sinc_squared"; throws ValidationError otherwise.
[[nodiscard]] Envelope envelope_from_string(const std::string& name);

/// SPDC source: phase-matching bandwidth and pump.
struct SourceSpec {
    double phase_matching_fwhm_hz = 245e9;
    Envelope envelope_shape = Envelope::sinc_squared;
    double pump_power_mw = 2.0;
    double degenerate_wavelength_nm = 1316.0;

    /// Throws ValidationError on non-positive bandwidth or negative power.
    void validate() const;

    /// Relative pair intensity at signal detuning nu_hz, 1 at degeneracy and
    /// 1/2 at nu = ±B_PM/2 for either shape.
    [[nodiscard]] double envelope(double nu_hz) const;

    bool operator==(const SourceSpec&) const = default;
};

/// Zero of sinc²(x) = 1/2 for sinc(x) = sin(x)/x.
inline constexpr double kSincSquaredHalfPoint = 1.3915573782515103;

/// Discretized comb: normalized bin weights for m in [-N, N].
struct CombSpectrum {
    int n_max = 0;
    std::vector<double> bin_weights;  // index m + n_max
    double half_width_rad_s = 0.0;
    double fsr_rad_s = 0.0;

    [[nodiscard]] int bin_count() const noexcept { return 2 * n_max + 1; }
    [[nodiscard]] double weight(int m) const;
    [[nodiscard]] double fsr_hz() const noexcept { return fsr_rad_s / (2.0 * std::numbers::pi); }
    [[nodiscard]] double round_trip_ps() const noexcept { return 1e12 * 2.0 * std::numbers::pi / fsr_rad_s; }
    /// ΔωΔT = π/F
    [[nodiscard]] double decay_per_round_trip() const noexcept {
        return half_width_rad_s * 2.0 * std::numbers::pi / fsr_rad_s;
    }
};

[[nodiscard]] double round_trip_time(const CavitySpec& cavity);

/// Cavity transmission lineshape f(Ω) = 1 / (Δω² + Ω²), unnormalized.
[[nodiscard]] double bin_lineshape(double detuning_rad_s, double half_width_rad_s);

/// Bin count covering ±3·B_PM: floor(3·B_PM / FSR).
[[nodiscard]] int default_n_max(const CavitySpec& cavity, const SourceSpec& source);

/// Builds the comb. Rejects n_max < 0. When `warnings` is given, a note is
/// appended if the comb spans far more than the phase-matching bandwidth.
[[nodiscard]] CombSpectrum build_comb(const CavitySpec& cavity, const SourceSpec& source, int n_max,
                                      std::vector<std::string>* warnings = nullptr);

/// |Ψ(nΔT)|², the sampled temporal intensity; sums to 1 over [-N, N].
[[nodiscard]] double temporal_envelope(const CombSpectrum& comb, int n);

}  // namespace bfc
