#pragma once

// Schmidt-mode decomposition of the comb in the frequency-bin and time-bin
// bases, and the resulting Hilbert-space dimensionality bookkeeping.
//
// Both bases assume a pure state whose amplitude is the elementwise square
// root of the measured (or modelled) intensity. JSI-derived Schmidt numbers
// are therefore amplitude-approximated.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bfc/comb_model.hpp"
#include "bfc/spectral_corr.hpp"

namespace bfc {

enum class SchmidtBasis { frequency, time };

[[nodiscard]] const char* to_string(SchmidtBasis b) noexcept;

struct SchmidtSpectrum {
    std::vector<double> eigenvalues;  // descending, sum 1
    /// Label per eigenvalue: rank for the frequency basis, signed time bin n for the time basis.
    std::vector<int> mode_index;
    double k_number = 1.0;
    SchmidtBasis basis = SchmidtBasis::frequency;
};

/// 1 / Σλ² of a normalized spectrum.
[[nodiscard]] double schmidt_number(std::span<const double> eigenvalues);

/// Elementwise square root, rescaled to unit Frobenius norm.
[[nodiscard]] Eigen::MatrixXd jsa_from_jsi(const Jsi& jsi);
[[nodiscard]] Eigen::MatrixXd jsa_from_jsi(const Eigen::MatrixXd& intensity);

/// Singular value decomposition; λ = σ² normalized. Rejects the zero matrix.
[[nodiscard]] SchmidtSpectrum schmidt_decompose(const Eigen::MatrixXd& jsa);

/// Time-bin eigenvalues λ_n ∝ exp(-2|n|·x) for |n| ≤ n_max, x = ΔωΔT.
[[nodiscard]] SchmidtSpectrum time_bin_eigenvalues_from_decay(double decay_per_bin, int n_max);
/// Same with x = π/F taken from the cavity.
[[nodiscard]] SchmidtSpectrum time_bin_eigenvalues(const CavitySpec& cavity, int n_max);

/// Window-limited time-bin count: revivals per side inside ±window (spacing ΔT/2).
[[nodiscard]] int window_limited_n_max(const CavitySpec& cavity, double delay_window_ps);

struct VisibilityPoint {
    int n = 0;
    double visibility = 1.0;
};

struct TimeBinFit {
    double decay_per_bin = 0.0;  // fitted ΔωΔT
    double implied_finesse = 0.0;  // π / x, infinite when x = 0
    SchmidtSpectrum spectrum;
};

/// Inverts each visibility through e^{-x}(1+x), fits x·|n| through the origin
/// by least squares, then builds the time-bin spectrum for n_max.
[[nodiscard]] TimeBinFit time_bin_spectrum_from_visibilities(std::span<const VisibilityPoint> points,
                                                              int n_max);

struct BinCounts {
    double n_freq_bins = 0.0;          // N_Ω = B_PM / FSR
    double n_time_bins = 0.0;          // N_T = F
    double n_time_bins_window = 0.0;   // min(F, window / (ΔT/2))

    [[nodiscard]] double product() const noexcept { return n_freq_bins * n_time_bins; }
};

[[nodiscard]] BinCounts bin_counts(const CavitySpec& cavity, const SourceSpec& source, double delay_window_ps);

struct DimensionalityReport {
    double k_time = 1.0;
    double k_freq = 1.0;
    double n_time_bins = 0.0;
    double n_freq_bins = 0.0;
    double product_nt_nomega = 0.0;
    double product_kt_komega = 0.0;
    int polarization_factor = 2;
    long time_dimensionality = 1;       // floor(k_time)²
    long frequency_dimensionality = 1;  // floor(k_freq)²
    long total_dimensionality = 2;      // polarization_factor · floor(k_time)²
};

/// Rejects Schmidt numbers below 1.
[[nodiscard]] DimensionalityReport dimensionality_report(double k_time, double k_freq, const BinCounts& counts);

}  // namespace bfc
