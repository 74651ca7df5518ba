#include "bfc/spectral_corr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bfc/errors.hpp"

namespace bfc {

Jsi::Jsi(BinRange range, Eigen::MatrixXd values, bool normalized)
    : range_(range), values_(std::move(values)), normalized_(normalized) {
    if (range_.size() <= 0) throw ValidationError("Jsi: empty bin range");
    if (values_.rows() != range_.size() || values_.cols() != range_.size())
        throw ValidationError("Jsi: matrix shape does not match the bin range");
    if (!values_.allFinite() || (values_.array() < 0.0).any())
        throw ValidationError("Jsi: entries must be finite and nonnegative");
    if (normalized_ && std::abs(values_.sum() - 1.0) > 1e-12)
        throw ValidationError("Jsi: normalized flag set but entries do not sum to 1");
}

double Jsi::at(int ns, int ni) const {
    if (!range_.contains(ns) || !range_.contains(ni)) throw ValidationError("Jsi: bin index out of range");
    return values_(ns - range_.first, ni - range_.first);
}

Jsi Jsi::normalized_copy() const {
    const double total = values_.sum();
    if (!(total > 0.0)) throw ValidationError("Jsi: cannot normalize an all-zero matrix");
    return Jsi(range_, values_ / total, true);
}

const char* to_string(FilterShape s) noexcept {
    switch (s) {
        case FilterShape::gaussian: return "gaussian";
        case FilterShape::lorentzian: return "lorentzian";
    }
    return "unknown";
}

FilterShape filter_shape_from_string(const std::string& name) {
    if (name == "gaussian") return FilterShape::gaussian;
    if (name == "lorentzian") return FilterShape::lorentzian;
    throw ValidationError("unknown filter shape '" + name + "' (expected gaussian or lorentzian)");
}

void FilterSpec::validate() const {
    if (!(fwhm_hz >= 0.0) || !std::isfinite(fwhm_hz)) throw ValidationError("FilterSpec requires fwhm_hz >= 0");
    if (!std::isfinite(center_offset_bins)) throw ValidationError("FilterSpec: non-finite center offset");
}

double FilterSpec::transmission(double offset_hz) const {
    if (fwhm_hz == 0.0) return std::abs(offset_hz) < 1e-6 ? 1.0 : 0.0;
    const double u = offset_hz / fwhm_hz;
    switch (shape) {
        case FilterShape::gaussian: return std::exp(-4.0 * std::numbers::ln2 * u * u);
        case FilterShape::lorentzian: return 1.0 / (1.0 + 4.0 * u * u);
    }
    return 0.0;
}

double filter_fwhm_from_pm(double fwhm_pm, double center_wavelength_nm) {
    const double lambda = center_wavelength_nm * 1e-9;
    return kSpeedOfLight * fwhm_pm * 1e-12 / (lambda * lambda);
}

AccidentalModel AccidentalModel::calibrated(double pump_power_mw, const AccidentalCalibration& cal) {
    if (!(pump_power_mw >= 0.0)) throw ValidationError("accidental floor: pump power must be >= 0");
    const double p1 = cal.power_low_mw;
    const double p2 = cal.power_high_mw;
    const double r1 = std::pow(10.0, cal.crosstalk_low_db / 10.0);
    const double r2 = std::pow(10.0, cal.crosstalk_high_db / 10.0);
    // [p1 p1²; p2 p2²]·[a; b] = [r1; r2]
    const double det = p1 * p2 * p2 - p2 * p1 * p1;
    if (det == 0.0) throw ValidationError("accidental calibration anchors must use distinct nonzero powers");
    AccidentalModel m;
    m.pump_power_mw = pump_power_mw;
    m.linear = (r1 * p2 * p2 - r2 * p1 * p1) / det;
    m.quadratic = (p1 * r2 - p2 * r1) / det;
    return m;
}

double AccidentalModel::relative_floor() const {
    if (!(pump_power_mw >= 0.0)) throw ValidationError("accidental floor: pump power must be >= 0");
    return linear * pump_power_mw + quadratic * pump_power_mw * pump_power_mw;
}

double accidental_floor(double pump_power_mw) {
    return AccidentalModel::calibrated(pump_power_mw).relative_floor();
}

Jsi ideal_jsi(const CombSpectrum& comb) {
    const BinRange range{-comb.n_max, comb.n_max};
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(range.size(), range.size());
    for (int m = -comb.n_max; m <= comb.n_max; ++m) v(m + comb.n_max, -m + comb.n_max) = comb.weight(m);
    // Weights already sum to 1 up to rounding; renormalize to honor the flag exactly.
    return Jsi(range, v / v.sum(), true);
}

namespace {

/// transfer(t, m) = T(m - target - offset), rows are filter targets.
Eigen::MatrixXd transfer_matrix(const FilterSpec& f, const BinRange& targets, const BinRange& source,
                                double fsr_hz) {
    Eigen::MatrixXd out(targets.size(), source.size());
    for (int t = targets.first; t <= targets.last; ++t)
        for (int m = source.first; m <= source.last; ++m)
            out(t - targets.first, m - source.first) =
                f.transmission((m - t - f.center_offset_bins) * fsr_hz);
    return out;
}

}  // namespace

double apply_filters(const Jsi& jsi, const CombSpectrum& comb, const FilterSpec& sig, const FilterSpec& idl,
                     int sig_bin, int idl_bin) {
    sig.validate();
    idl.validate();
    if (std::abs(sig_bin) > comb.n_max || std::abs(idl_bin) > comb.n_max)
        throw ValidationError("apply_filters: target bin outside [-N, N]");
    const BinRange& r = jsi.range();
    const double fsr = comb.fsr_hz();
    double total = 0.0;
    for (int ms = r.first; ms <= r.last; ++ms) {
        const double ts = sig.transmission((ms - sig_bin - sig.center_offset_bins) * fsr);
        if (ts == 0.0) continue;
        for (int mi = r.first; mi <= r.last; ++mi) {
            const double v = jsi.values()(ms - r.first, mi - r.first);
            if (v == 0.0) continue;
            total += v * ts * idl.transmission((mi - idl_bin - idl.center_offset_bins) * fsr);
        }
    }
    return total;
}

Eigen::MatrixXd filtered_matrix(const Jsi& jsi, const CombSpectrum& comb, const FilterSpec& sig,
                                const FilterSpec& idl, BinRange range) {
    sig.validate();
    idl.validate();
    if (range.size() <= 0 || range.first < -comb.n_max || range.last > comb.n_max)
        throw ValidationError("filtered_matrix: bin range outside [-N, N]");
    const double fsr = comb.fsr_hz();
    const Eigen::MatrixXd ts = transfer_matrix(sig, range, jsi.range(), fsr);
    const Eigen::MatrixXd ti = transfer_matrix(idl, range, jsi.range(), fsr);
    return ts * jsi.values() * ti.transpose();
}

Jsi scan_correlation_matrix(const CombSpectrum& comb, const FilterSpec& sig, const FilterSpec& idl,
                            BinRange range, const AccidentalModel& floor) {
    Eigen::MatrixXd m = filtered_matrix(ideal_jsi(comb), comb, sig, idl, range);

    const double r = floor.relative_floor();
    if (r > 0.0) {
        if (!(r < 1.0)) {
            std::ostringstream os;
            os << "accidental floor r=" << r << " at " << floor.pump_power_mw
               << " mW saturates the scan (requires r < 1)";
            throw ValidationError(os.str());
        }
        double min_diag = std::numeric_limits<double>::infinity();
        for (int s = range.first; s <= range.last; ++s)
            if (range.contains(-s)) min_diag = std::min(min_diag, m(s - range.first, -s - range.first));
        if (!std::isfinite(min_diag))
            throw ValidationError("scan_correlation_matrix: range holds no anti-diagonal cell");
        m.array() += r / (1.0 - r) * min_diag;
    }
    return Jsi(range, m, false).normalized_copy();
}

std::optional<double> crosstalk_db(const Jsi& jsi) {
    const BinRange& r = jsi.range();
    const auto& v = jsi.values();
    if (!(v.sum() > 0.0)) throw ValidationError("crosstalk_db: all-zero matrix");
    double min_diag = std::numeric_limits<double>::infinity();
    double max_off = 0.0;
    for (int s = r.first; s <= r.last; ++s) {
        for (int i = r.first; i <= r.last; ++i) {
            const double x = v(s - r.first, i - r.first);
            if (s + i == 0)
                min_diag = std::min(min_diag, x);
            else
                max_off = std::max(max_off, x);
        }
    }
    if (!std::isfinite(min_diag) || !(min_diag > 0.0))
        throw ValidationError("crosstalk_db: needs a nonzero anti-diagonal cell in every scanned row");
    if (max_off == 0.0) return std::nullopt;
    return 10.0 * std::log10(max_off / min_diag);
}

}  // namespace bfc
