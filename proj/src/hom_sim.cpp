#include "bfc/hom_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bfc/errors.hpp"

namespace bfc {
namespace {

// Trig values are recomputed exactly every kReseedInterval steps of the
// rotation recurrence, bounding accumulated phase error.
constexpr int kReseedInterval = 64;

/// Trapezoid-weighted spectral intensity on the half grid Ω_j = j·h, j ≥ 0.
struct HalfGridSpectrum {
    double step = 0.0;
    std::vector<double> weighted;  // trapezoid weight · S(Ω_j), j = 0 counted once
    double norm = 0.0;             // ∫ S over the full symmetric grid
};

HalfGridSpectrum tabulate_spectrum(const CombSpectrum& comb, int points_per_linewidth) {
    const double dw = comb.half_width_rad_s;
    const double span = (comb.n_max + 0.5) * comb.fsr_rad_s;
    const double target_step = 2.0 * dw / points_per_linewidth;
    const auto half_points = static_cast<std::size_t>(std::ceil(span / target_step));

    HalfGridSpectrum out;
    out.step = span / static_cast<double>(half_points);
    out.weighted.resize(half_points + 1);

    for (std::size_t j = 0; j <= half_points; ++j) {
        const double omega = static_cast<double>(j) * out.step;
        double s = 0.0;
        for (int m = -comb.n_max; m <= comb.n_max; ++m) {
            // Intensity of a bin is the squared Lorentzian amplitude.
            const double f = bin_lineshape(omega - m * comb.fsr_rad_s, dw);
            s += comb.bin_weights[static_cast<std::size_t>(m + comb.n_max)] * f * f;
        }
        // Scale by dw^4 to keep values O(1); the ratio V(τ) is unaffected.
        s *= dw * dw * dw * dw;
        const double trap = (j == half_points) ? 0.5 : 1.0;
        // Interior points appear twice in the symmetric grid, Ω = 0 once.
        const double mult = (j == 0) ? 1.0 : 2.0;
        out.weighted[j] = trap * mult * s;
    }
    for (double v : out.weighted) out.norm += v;
    return out;
}

double cosine_transform(const HalfGridSpectrum& spec, double tau_s) {
    const double theta = 2.0 * spec.step * tau_s;
    const double c1 = std::cos(theta);
    const double s1 = std::sin(theta);
    double acc = 0.0;
    double c = 1.0;
    double s = 0.0;
    for (std::size_t j = 0; j < spec.weighted.size(); ++j) {
        if (j % kReseedInterval == 0) {
            c = std::cos(theta * static_cast<double>(j));
            s = std::sin(theta * static_cast<double>(j));
        }
        acc += spec.weighted[j] * c;
        const double cn = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = cn;
    }
    return acc / spec.norm;
}

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

}  // namespace

double HomTrace::revival_spacing_ps() const { return 1e12 * std::numbers::pi / fsr_rad_s; }

std::vector<double> delay_grid(double window_ps, double step_ps) {
    if (!(step_ps > 0.0) || !(window_ps >= 0.0))
        throw ValidationError("delay grid requires step_ps > 0 and window_ps >= 0");
    const auto k_max = static_cast<long>(std::floor(window_ps / step_ps + 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(2 * k_max + 1));
    for (long k = -k_max; k <= k_max; ++k) grid.push_back(static_cast<double>(k) * step_ps);
    return grid;
}

HomTrace simulate_hom_trace(const CombSpectrum& comb, std::span<const double> delays_ps,
                            const HomOptions& options) {
    if (delays_ps.empty()) throw ValidationError("simulate_hom_trace: empty delay grid");
    for (std::size_t i = 0; i < delays_ps.size(); ++i) {
        if (!std::isfinite(delays_ps[i])) throw ValidationError("simulate_hom_trace: non-finite delay");
        if (i > 0 && !(delays_ps[i] > delays_ps[i - 1]))
            throw ValidationError("simulate_hom_trace: delays must be strictly increasing");
    }
    if (options.points_per_linewidth < 8)
        throw ValidationError("simulate_hom_trace: quadrature coarser than linewidth/8 risks aliasing");
    if (!(options.accidental_fraction >= 0.0 && options.accidental_fraction < 1.0))
        throw ValidationError("simulate_hom_trace: accidental fraction must lie in [0, 1)");

    const HalfGridSpectrum spec = tabulate_spectrum(comb, options.points_per_linewidth);
    const double scale = 1.0 - options.accidental_fraction;

    HomTrace trace;
    trace.n_max = comb.n_max;
    trace.fsr_rad_s = comb.fsr_rad_s;
    trace.half_width_rad_s = comb.half_width_rad_s;
    trace.delays_ps.assign(delays_ps.begin(), delays_ps.end());
    trace.coincidence.reserve(delays_ps.size());
    for (double tau_ps : delays_ps) {
        const double v = cosine_transform(spec, tau_ps * 1e-12);
        trace.coincidence.push_back(1.0 - scale * v);
    }
    return trace;
}

double dip_visibility_from_decay(double x) {
    const double ax = std::abs(x);
    return std::exp(-ax) * (1.0 + ax);
}

double dip_visibility_closed_form(int n, const CavitySpec& cavity) {
    return dip_visibility_from_decay(std::abs(n) * cavity.decay_per_round_trip());
}

double visibility_to_decay_parameter(double v) {
    if (!(v > 0.0 && v <= 1.0))
        throw ValidationError("visibility_to_decay_parameter requires 0 < v <= 1");
    if (v == 1.0) return 0.0;
    // e^{-x}(1+x) is strictly decreasing on x > 0; bracket then bisect.
    double lo = 0.0;
    double hi = 1.0;
    while (dip_visibility_from_decay(hi) > v) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dip_visibility_from_decay(mid) > v)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

RevivalScan locate_revivals(const HomTrace& trace) {
    const auto& t = trace.delays_ps;
    const auto& c = trace.coincidence;
    if (t.size() < 3 || c.size() != t.size())
        throw ValidationError("locate_revivals: trace needs at least 3 samples of equal length arrays");

    const double spacing = trace.revival_spacing_ps();
    if (t.back() - t.front() < spacing)
        throw ValidationError("locate_revivals: trace must span at least one revival period");

    RevivalScan scan;
    double max_step = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) max_step = std::max(max_step, t[i] - t[i - 1]);
    if (max_step > spacing / 10.0) {
        std::ostringstream os;
        os << "delay grid step " << max_step << " ps exceeds a tenth of the revival spacing " << spacing
           << " ps; dip centers are unreliable";
        scan.warnings.push_back(os.str());
    }

    struct Dip {
        int n;
        double center;
        double depth;
    };
    std::vector<Dip> dips;
    const auto n_lo = static_cast<int>(std::ceil(t.front() / spacing));
    const auto n_hi = static_cast<int>(std::floor(t.back() / spacing));
    for (int n = n_lo; n <= n_hi; ++n) {
        const double center = n * spacing;
        const auto first = static_cast<std::size_t>(
            std::lower_bound(t.begin(), t.end(), center - spacing / 4.0) - t.begin());
        const auto last = static_cast<std::size_t>(
            std::upper_bound(t.begin(), t.end(), center + spacing / 4.0) - t.begin());
        if (last <= first + 2) continue;
        std::size_t imin = first;
        for (std::size_t i = first; i < last; ++i)
            if (c[i] < c[imin]) imin = i;
        // A window minimum sitting on the window edge is a slope, not a dip.
        if (imin == first || imin + 1 == last) continue;
        if (!(c[imin] < c[imin - 1] || c[imin] < c[imin + 1])) continue;

        // Parabolic refinement of the dip center and depth.
        double refined = t[imin];
        double depth = c[imin];
        const double denom = c[imin - 1] - 2.0 * c[imin] + c[imin + 1];
        if (denom > 0.0) {
            const double h = 0.5 * (t[imin + 1] - t[imin - 1]);
            const double shift = 0.5 * (c[imin - 1] - c[imin + 1]) / denom;
            if (std::abs(shift) <= 0.5) {
                refined = t[imin] + shift * h;
                depth = c[imin] - 0.25 * (c[imin - 1] - c[imin + 1]) * shift;
            }
        }
        dips.push_back({n, refined, depth});
    }

    auto interval_samples = [&](double a, double b, std::vector<double>& out) {
        const double lo = a + 0.25 * (b - a);
        const double hi = a + 0.75 * (b - a);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= lo && t[i] <= hi) out.push_back(c[i]);
    };

    const double trace_max = *std::max_element(c.begin(), c.end());
    for (std::size_t k = 0; k < dips.size(); ++k) {
        std::vector<double> plateau;
        if (k > 0) interval_samples(dips[k - 1].center, dips[k].center, plateau);
        if (k + 1 < dips.size()) interval_samples(dips[k].center, dips[k + 1].center, plateau);
        const double c_max = plateau.empty() ? trace_max : median(std::move(plateau));
        const double c_min = dips[k].depth;
        const double vis = c_max > 0.0 ? std::clamp((c_max - c_min) / c_max, 0.0, 1.0) : 0.0;
        scan.records.push_back({dips[k].n, dips[k].center, vis});
    }
    return scan;
}

double central_dip_width(const HomTrace& trace, double threshold) {
    if (!(threshold > 0.0 && threshold <= 0.5))
        throw ValidationError("central_dip_width: threshold must lie in (0, 0.5]");
    const auto& t = trace.delays_ps;
    const auto& c = trace.coincidence;
    if (t.empty() || c.size() != t.size()) throw ValidationError("central_dip_width: malformed trace");

    const auto zero_it = std::lower_bound(t.begin(), t.end(), 0.0);
    std::size_t i0 = static_cast<std::size_t>(zero_it - t.begin());
    if (i0 == t.size() || (i0 > 0 && std::abs(t[i0 - 1]) < std::abs(t[i0]))) --i0;
    auto vis = [&](std::size_t i) { return 1.0 - c[i]; };
    if (vis(i0) < threshold) throw ValidationError("central_dip_width: no dip at zero delay");

    std::size_t r = i0;
    while (r + 1 < t.size() && vis(r + 1) >= threshold) ++r;
    std::size_t l = i0;
    while (l > 0 && vis(l - 1) >= threshold) --l;
    if (r + 1 == t.size() || l == 0)
        throw ValidationError("central_dip_width: dip does not fall below threshold inside the trace");
    if (r - l + 1 < 20)
        throw ValidationError("central_dip_width: trace resolves the central dip with fewer than 20 samples");

    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double vi = vis(inside);
        const double vo = vis(outside);
        const double frac = (vi - threshold) / (vi - vo);
        return t[inside] + frac * (t[outside] - t[inside]);
    };
    return crossing(r, r + 1) - crossing(l, l - 1);
}

}  // namespace bfc
