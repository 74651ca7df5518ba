#include "bfc/comb_model.hpp"

#include <cmath>
#include <sstream>

#include "bfc/errors.hpp"

namespace bfc {

CavitySpec::CavitySpec(double fsr_hz, double linewidth_fwhm_hz, std::string label)
    : fsr_hz_(fsr_hz), linewidth_hz_(linewidth_fwhm_hz), label_(std::move(label)) {
    if (!(std::isfinite(fsr_hz) && std::isfinite(linewidth_fwhm_hz)) || !(linewidth_fwhm_hz > 0.0) ||
        !(fsr_hz > linewidth_fwhm_hz)) {
        std::ostringstream os;
        os << "CavitySpec requires fsr_hz > linewidth_fwhm_hz > 0 (got fsr_hz=" << fsr_hz
           << ", linewidth_fwhm_hz=" << linewidth_fwhm_hz << ")";
        throw ValidationError(os.str());
    }
}

const char* to_string(Envelope e) noexcept {
    switch (e) {
        case Envelope::gaussian: return "gaussian";
        case Envelope::sinc_squared: return "sinc_squared";
    }
    return "unknown";
}

Envelope envelope_from_string(const std::string& name) {
    if (name == "gaussian") return Envelope::gaussian;
    if (name == "sinc_squared") return Envelope::sinc_squared;
    throw ValidationError("unknown envelope shape '" + name + "' (expected gaussian or sinc_squared)");
}

void SourceSpec::validate() const {
    if (!(phase_matching_fwhm_hz > 0.0) || !std::isfinite(phase_matching_fwhm_hz))
        throw ValidationError("SourceSpec requires phase_matching_fwhm_hz > 0");
    if (!(pump_power_mw >= 0.0) || !std::isfinite(pump_power_mw))
        throw ValidationError("SourceSpec requires pump_power_mw >= 0");
    if (!(degenerate_wavelength_nm > 0.0))
        throw ValidationError("SourceSpec requires degenerate_wavelength_nm > 0");
}

double SourceSpec::envelope(double nu_hz) const {
    const double u = nu_hz / phase_matching_fwhm_hz;
    switch (envelope_shape) {
        case Envelope::gaussian:
            return std::exp(-4.0 * std::numbers::ln2 * u * u);
        case Envelope::sinc_squared: {
            const double x = 2.0 * kSincSquaredHalfPoint * u;
            if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
            const double s = std::sin(x) / x;
            return s * s;
        }
    }
    return 0.0;
}

double CombSpectrum::weight(int m) const {
    if (m < -n_max || m > n_max) throw ValidationError("comb bin index out of range");
    return bin_weights[static_cast<std::size_t>(m + n_max)];
}

double round_trip_time(const CavitySpec& cavity) { return cavity.round_trip_ps(); }

double bin_lineshape(double detuning_rad_s, double half_width_rad_s) {
    return 1.0 / (half_width_rad_s * half_width_rad_s + detuning_rad_s * detuning_rad_s);
}

int default_n_max(const CavitySpec& cavity, const SourceSpec& source) {
    return static_cast<int>(std::floor(3.0 * source.phase_matching_fwhm_hz / cavity.fsr_hz()));
}

CombSpectrum build_comb(const CavitySpec& cavity, const SourceSpec& source, int n_max,
                        std::vector<std::string>* warnings) {
    if (n_max < 0) throw ValidationError("build_comb requires n_max >= 0");
    source.validate();

    const double span_hz = 2.0 * n_max * cavity.fsr_hz();
    if (warnings != nullptr && span_hz > 10.0 * source.phase_matching_fwhm_hz) {
        std::ostringstream os;
        os << "comb span " << span_hz * 1e-9 << " GHz exceeds 10x the phase-matching bandwidth";
        warnings->push_back(os.str());
    }

    CombSpectrum comb;
    comb.n_max = n_max;
    comb.half_width_rad_s = cavity.half_width_rad_s();
    comb.fsr_rad_s = cavity.fsr_rad_s();
    comb.bin_weights.resize(static_cast<std::size_t>(2 * n_max + 1));

    // Fill from the center outward so weight(m) and weight(-m) are the same double.
    for (int m = 0; m <= n_max; ++m) {
        const double w = source.envelope(m * cavity.fsr_hz());
        comb.bin_weights[static_cast<std::size_t>(n_max + m)] = w;
        comb.bin_weights[static_cast<std::size_t>(n_max - m)] = w;
    }
    double total = 0.0;
    for (double w : comb.bin_weights) total += w;
    for (double& w : comb.bin_weights) w /= total;
    return comb;
}

double temporal_envelope(const CombSpectrum& comb, int n) {
    if (n < -comb.n_max || n > comb.n_max)
        throw ValidationError("temporal_envelope: |n| must not exceed n_max");
    const double x = comb.decay_per_round_trip();
    double norm = 0.0;
    for (int k = -comb.n_max; k <= comb.n_max; ++k) norm += std::exp(-2.0 * std::abs(k) * x);
    return std::exp(-2.0 * std::abs(n) * x) / norm;
}

}  // namespace bfc
