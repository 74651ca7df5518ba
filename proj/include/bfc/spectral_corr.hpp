#pragma once

// Joint spectral intensity (JSI) matrices over signal x idler frequency bins.
//
// The ideal comb state populates only the anti-diagonal n_s + n_i = 0. A
// measurement with finite-bandwidth filters smears neighbouring bin pairs
// into every cell, and multi-pair emission adds a uniform accidental floor
// that grows with pump power.

#include <Eigen/Dense>
#include <optional>

#include "bfc/comb_model.hpp"

namespace bfc {

/// Inclusive bin index range shared by the signal and idler axes.
struct BinRange {
    int first = 0;
    int last = 0;

    [[nodiscard]] int size() const noexcept { return last - first + 1; }
    [[nodiscard]] bool contains(int n) const noexcept { return n >= first && n <= last; }
    bool operator==(const BinRange&) const = default;
};

class Jsi {
public:
    /// Throws ValidationError on shape mismatch or negative/non-finite entries.
    Jsi(BinRange range, Eigen::MatrixXd values, bool normalized);

    [[nodiscard]] const BinRange& range() const noexcept { return range_; }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] bool normalized() const noexcept { return normalized_; }
    /// Entry at signal bin ns, idler bin ni.
    [[nodiscard]] double at(int ns, int ni) const;

    /// Copy scaled to unit total weight. Throws ValidationError on an all-zero matrix.
    [[nodiscard]] Jsi normalized_copy() const;

private:
    BinRange range_;
    Eigen::MatrixXd values_;  // rows: signal, cols: idler
    bool normalized_;
};

enum class FilterShape { gaussian, lorentzian };

[[nodiscard]] const char* to_string(FilterShape s) noexcept;
[[nodiscard]] FilterShape filter_shape_from_string(const std::string& name);

struct FilterSpec {
    double fwhm_hz = 0.0;  // 0 is an ideal single-bin selector
    FilterShape shape = FilterShape::gaussian;
    double center_offset_bins = 0.0;

    void validate() const;
    /// Intensity transmission at a detuning from the filter center.
    [[nodiscard]] double transmission(double offset_hz) const;
};

/// Filter bandwidth in Hz from a wavelength FWHM: Δν = c·Δλ/λ².
[[nodiscard]] double filter_fwhm_from_pm(double fwhm_pm, double center_wavelength_nm = 1316.0);

/// Accidental-floor calibration anchors: cross-talk levels at two pump powers.
struct AccidentalCalibration {
    double power_low_mw = 2.0;
    double crosstalk_low_db = -11.71;
    double power_high_mw = 4.0;
    double crosstalk_high_db = -6.31;
};

/// r(P) = a·P + b·P², solved through the two calibration anchors.
struct AccidentalModel {
    double pump_power_mw = 0.0;
    double linear = 0.0;
    double quadratic = 0.0;

    [[nodiscard]] static AccidentalModel calibrated(double pump_power_mw,
                                                    const AccidentalCalibration& cal = {});
    [[nodiscard]] double relative_floor() const;
};

/// Relative accidental floor r(P) of the default calibration. Rejects P < 0.
[[nodiscard]] double accidental_floor(double pump_power_mw);

[[nodiscard]] Jsi ideal_jsi(const CombSpectrum& comb);

/// Coincidence weight with the signal filter tuned to sig_bin and the idler
/// filter to idl_bin.
[[nodiscard]] double apply_filters(const Jsi& jsi, const CombSpectrum& comb, const FilterSpec& sig,
                                   const FilterSpec& idl, int sig_bin, int idl_bin);

/// All apply_filters outputs over range x range, unnormalized.
[[nodiscard]] Eigen::MatrixXd filtered_matrix(const Jsi& jsi, const CombSpectrum& comb, const FilterSpec& sig,
                                              const FilterSpec& idl, BinRange range);

/// Filtered scan of the ideal comb JSI plus the accidental floor, normalized.
///
/// The floor is uniform over cells. Its level is set so that, against the
/// weakest scanned anti-diagonal cell, accidentals alone produce a
/// cross-talk ratio of r(P): A = r/(1 - r) * min_diag. Requires r(P) < 1.
[[nodiscard]] Jsi scan_correlation_matrix(const CombSpectrum& comb, const FilterSpec& sig, const FilterSpec& idl,
                                          BinRange range, const AccidentalModel& floor);

/// 10·log10(max off-anti-diagonal cell / min anti-diagonal cell).
/// std::nullopt when no off-anti-diagonal weight exists (-infinity dB).
[[nodiscard]] std::optional<double> crosstalk_db(const Jsi& jsi);

}  // namespace bfc
