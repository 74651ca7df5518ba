#include "bfc/bell_chsh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "bfc/errors.hpp"

namespace bfc {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_visibility(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("visibility must lie in [0, 1]");
}

std::int64_t poisson_draw(double mean, std::mt19937_64& rng) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

CoincidenceSet draw_set(double phi1, double phi2, double v, double integration, std::mt19937_64& rng) {
    CoincidenceSet c;
    c.parallel = static_cast<double>(poisson_draw(integration * fringe_rate(phi1, phi2, v), rng));
    c.cross_second = static_cast<double>(poisson_draw(integration * fringe_rate(phi1, phi2 + 90.0, v), rng));
    c.cross_first = static_cast<double>(poisson_draw(integration * fringe_rate(phi1 + 90.0, phi2, v), rng));
    c.orthogonal = static_cast<double>(poisson_draw(integration * fringe_rate(phi1 + 90.0, phi2 + 90.0, v), rng));
    return c;
}

}  // namespace

double fringe_rate(double phi1_deg, double phi2_deg, double visibility) {
    check_visibility(visibility);
    return 0.5 * (1.0 - visibility * std::cos(2.0 * (phi1_deg + phi2_deg) * kDeg));
}

std::vector<double> angle_grid(double start_deg, double stop_deg, int count) {
    if (count < 1) throw ValidationError("angle_grid: count must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    const double step = (stop_deg - start_deg) / count;
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = start_deg + i * step;
    return out;
}

FringeScan simulate_fringe_scan(double fixed_deg, std::span<const double> scan_deg, double visibility,
                                double integration, std::mt19937_64& rng) {
    check_visibility(visibility);
    if (!(integration > 0.0)) throw ValidationError("simulate_fringe_scan: integration must be > 0");
    FringeScan scan;
    scan.fixed_angle_deg = fixed_deg;
    scan.integration = integration;
    scan.scan_angles_deg.assign(scan_deg.begin(), scan_deg.end());
    scan.counts.reserve(scan_deg.size());
    for (double phi2 : scan_deg) scan.counts.push_back(poisson_draw(integration * fringe_rate(fixed_deg, phi2, visibility), rng));
    return scan;
}

FringeScan simulate_fringe_scan(double fixed_deg, std::span<const double> scan_deg, double visibility,
                                double integration, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate_fringe_scan(fixed_deg, scan_deg, visibility, integration, rng);
}

FringeFit fit_fringe(const FringeScan& scan, double accidental_counts) {
    const auto n = scan.scan_angles_deg.size();
    if (n != scan.counts.size()) throw ValidationError("fit_fringe: angle and count arrays differ in length");
    if (n < 6) throw ValidationError("fit_fringe: needs at least 6 angles");
    const auto [lo, hi] = std::minmax_element(scan.scan_angles_deg.begin(), scan.scan_angles_deg.end());
    // An evenly sampled half turn [0, 180) covers one full fringe period of 2φ.
    if (*hi - *lo < 180.0 * static_cast<double>(n - 1) / static_cast<double>(n) - 1e-9)
        throw ValidationError("fit_fringe: scan must cover a full 180 degree fringe period");

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 2.0 * scan.scan_angles_deg[i] * kDeg;
        const auto r = static_cast<Eigen::Index>(i);
        design(r, 0) = 1.0;
        design(r, 1) = std::cos(t);
        design(r, 2) = std::sin(t);
        y(r) = static_cast<double>(scan.counts[i]) - accidental_counts;
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - design * coef;

    FringeFit fit;
    fit.offset = coef(0);
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    // p·cos 2φ + q·sin 2φ = b·cos(2φ + c) with p = b cos c, q = -b sin c.
    fit.amplitude = std::hypot(coef(1), coef(2));
    if (!(fit.offset > 0.0) || !std::isfinite(fit.offset)) {
        std::ostringstream os;
        os << "fit_fringe: non-physical fit (offset " << fit.offset << ", residual rms " << fit.residual_rms << ")";
        throw RuntimeError("fit_fringe", os.str());
    }
    fit.visibility = fit.amplitude / fit.offset;
    fit.phase_defined = fit.amplitude > 1e-9 * fit.offset;
    fit.phase_deg = fit.phase_defined ? std::atan2(-coef(2), coef(1)) / kDeg : 0.0;
    if (!fit.phase_defined) fit.visibility = 0.0;
    return fit;
}

double correlation_E(const CoincidenceSet& c) {
    const double total = c.total();
    if (!(total > 0.0)) throw ValidationError("correlation_E: total counts must be > 0");
    return (c.parallel + c.orthogonal - c.cross_second - c.cross_first) / total;
}

double correlation_E_sigma(const CoincidenceSet& c) {
    const double e = correlation_E(c);
    return std::sqrt(std::max(0.0, 1.0 - e * e) / c.total());
}

std::optional<double> violation_sigmas(double s_value, double s_sigma) {
    if (s_value > 2.0 && s_sigma > 0.0) return (s_value - 2.0) / s_sigma;
    return std::nullopt;
}

ChshResult s_chsh(const std::array<double, 4>& e, const std::array<double, 4>& sigmas) {
    ChshResult r;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!std::isfinite(e[i])) throw ValidationError("s_chsh: missing or non-finite correlation");
        if (!(sigmas[i] >= 0.0)) throw ValidationError("s_chsh: correlation errors must be >= 0");
    }
    r.correlations = e;
    r.correlation_sigmas = sigmas;
    r.s_value = std::abs(e[0] - e[1] + e[2] + e[3]);
    double var = 0.0;
    for (double s : sigmas) var += s * s;
    r.s_sigma = std::sqrt(var);
    r.violation_sigmas = violation_sigmas(r.s_value, r.s_sigma);
    return r;
}

ChshResult s_chsh_from_visibility(double visibility, const ChshAngles& angles) {
    check_visibility(visibility);
    auto e = [&](double p1, double p2) { return -visibility * std::cos(2.0 * (p1 + p2) * kDeg); };
    return s_chsh({e(angles.a, angles.b), e(angles.a, angles.b_prime), e(angles.a_prime, angles.b),
                   e(angles.a_prime, angles.b_prime)});
}

ChshResult s_chsh_from_counts(const std::array<CoincidenceSet, 4>& counts) {
    std::array<double, 4> e{};
    std::array<double, 4> s{};
    for (std::size_t i = 0; i < 4; ++i) {
        e[i] = correlation_E(counts[i]);
        s[i] = correlation_E_sigma(counts[i]);
    }
    return s_chsh(e, s);
}

std::array<CoincidenceSet, 4> simulate_chsh_counts(double visibility, const ChshAngles& angles, double integration,
                                                   std::mt19937_64& rng) {
    check_visibility(visibility);
    if (!(integration > 0.0)) throw ValidationError("simulate_chsh_counts: integration must be > 0");
    return {draw_set(angles.a, angles.b, visibility, integration, rng),
            draw_set(angles.a, angles.b_prime, visibility, integration, rng),
            draw_set(angles.a_prime, angles.b, visibility, integration, rng),
            draw_set(angles.a_prime, angles.b_prime, visibility, integration, rng)};
}

double s_fringe_from_visibility(double v_mean) {
    check_visibility(v_mean);
    return 2.0 * std::numbers::sqrt2 * v_mean;
}

}  // namespace bfc
