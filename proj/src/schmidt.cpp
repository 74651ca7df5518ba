#include "bfc/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bfc/errors.hpp"
#include "bfc/hom_sim.hpp"

namespace bfc {

const char* to_string(SchmidtBasis b) noexcept {
    return b == SchmidtBasis::frequency ? "frequency" : "time";
}

double schmidt_number(std::span<const double> eigenvalues) {
    double sum_sq = 0.0;
    for (double l : eigenvalues) sum_sq += l * l;
    if (!(sum_sq > 0.0)) throw ValidationError("schmidt_number: empty or zero spectrum");
    return 1.0 / sum_sq;
}

Eigen::MatrixXd jsa_from_jsi(const Eigen::MatrixXd& intensity) {
    if (!intensity.allFinite() || (intensity.array() < 0.0).any())
        throw ValidationError("jsa_from_jsi: intensity must be finite and nonnegative");
    Eigen::MatrixXd amp = intensity.array().sqrt().matrix();
    const double norm = amp.norm();
    if (!(norm > 0.0)) throw ValidationError("jsa_from_jsi: all-zero intensity");
    return amp / norm;
}

Eigen::MatrixXd jsa_from_jsi(const Jsi& jsi) { return jsa_from_jsi(jsi.values()); }

SchmidtSpectrum schmidt_decompose(const Eigen::MatrixXd& jsa) {
    if (jsa.size() == 0 || !jsa.allFinite()) throw ValidationError("schmidt_decompose: empty or non-finite matrix");
    const double scale = jsa.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw ValidationError("schmidt_decompose: zero matrix");

    // Only singular values are needed.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(jsa / scale);
    const Eigen::VectorXd sv = svd.singularValues();

    SchmidtSpectrum out;
    out.basis = SchmidtBasis::frequency;
    out.eigenvalues.resize(static_cast<std::size_t>(sv.size()));
    double total = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        out.eigenvalues[static_cast<std::size_t>(i)] = sv(i) * sv(i);
        total += sv(i) * sv(i);
    }
    for (double& l : out.eigenvalues) l /= total;
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
    out.mode_index.resize(out.eigenvalues.size());
    for (std::size_t i = 0; i < out.mode_index.size(); ++i) out.mode_index[i] = static_cast<int>(i);
    out.k_number = schmidt_number(out.eigenvalues);
    return out;
}

SchmidtSpectrum time_bin_eigenvalues_from_decay(double decay_per_bin, int n_max) {
    if (n_max < 0) throw ValidationError("time_bin_eigenvalues: n_max must be >= 0");
    if (!(decay_per_bin >= 0.0) || !std::isfinite(decay_per_bin))
        throw ValidationError("time_bin_eigenvalues: decay parameter must be finite and >= 0");

    SchmidtSpectrum out;
    out.basis = SchmidtBasis::time;
    // Descending order: 0, -1, 1, -2, 2, ...
    out.mode_index.push_back(0);
    for (int n = 1; n <= n_max; ++n) {
        out.mode_index.push_back(-n);
        out.mode_index.push_back(n);
    }
    double total = 0.0;
    for (int n : out.mode_index) {
        const double w = std::exp(-2.0 * std::abs(n) * decay_per_bin);
        out.eigenvalues.push_back(w);
        total += w;
    }
    for (double& l : out.eigenvalues) l /= total;
    out.k_number = schmidt_number(out.eigenvalues);
    return out;
}

SchmidtSpectrum time_bin_eigenvalues(const CavitySpec& cavity, int n_max) {
    return time_bin_eigenvalues_from_decay(cavity.decay_per_round_trip(), n_max);
}

int window_limited_n_max(const CavitySpec& cavity, double delay_window_ps) {
    if (!(delay_window_ps >= 0.0)) throw ValidationError("delay window must be >= 0");
    return static_cast<int>(std::floor(delay_window_ps / (0.5 * cavity.round_trip_ps()) + 1e-12));
}

TimeBinFit time_bin_spectrum_from_visibilities(std::span<const VisibilityPoint> points, int n_max) {
    if (points.size() < 2) throw ValidationError("visibility fit needs at least 2 points");
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : points) {
        const double x = visibility_to_decay_parameter(p.visibility);
        const double an = std::abs(p.n);
        num += an * x;
        den += an * an;
    }
    if (den == 0.0) throw ValidationError("visibility fit is degenerate: every point has n = 0");

    TimeBinFit fit;
    fit.decay_per_bin = std::max(0.0, num / den);
    fit.implied_finesse =
        fit.decay_per_bin > 0.0 ? std::numbers::pi / fit.decay_per_bin : std::numeric_limits<double>::infinity();
    fit.spectrum = time_bin_eigenvalues_from_decay(fit.decay_per_bin, n_max);
    return fit;
}

BinCounts bin_counts(const CavitySpec& cavity, const SourceSpec& source, double delay_window_ps) {
    source.validate();
    if (!(delay_window_ps >= 0.0)) throw ValidationError("bin_counts: delay window must be >= 0");
    BinCounts c;
    c.n_freq_bins = source.phase_matching_fwhm_hz / cavity.fsr_hz();
    c.n_time_bins = cavity.finesse();
    c.n_time_bins_window = std::min(c.n_time_bins, delay_window_ps / (0.5 * cavity.round_trip_ps()));
    return c;
}

DimensionalityReport dimensionality_report(double k_time, double k_freq, const BinCounts& counts) {
    if (!(k_time >= 1.0) || !(k_freq >= 1.0))
        throw ValidationError("dimensionality_report: Schmidt numbers must be >= 1");
    DimensionalityReport r;
    r.k_time = k_time;
    r.k_freq = k_freq;
    r.n_time_bins = counts.n_time_bins;
    r.n_freq_bins = counts.n_freq_bins;
    r.product_nt_nomega = counts.product();
    r.product_kt_komega = k_time * k_freq;
    const auto kt = static_cast<long>(std::floor(k_time));
    const auto kf = static_cast<long>(std::floor(k_freq));
    r.time_dimensionality = kt * kt;
    r.frequency_dimensionality = kf * kf;
    r.total_dimensionality = r.polarization_factor * r.time_dimensionality;
    return r;
}

}  // namespace bfc
