#include "bfc/report.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bfc/errors.hpp"
#include "bfc/io.hpp"

namespace bfc {
namespace {

using nlohmann::json;

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const RuntimeError& e) {
        throw RuntimeError(name, e.what());
    } catch (const std::exception& e) {
        throw RuntimeError(name, e.what());
    }
}

Measured plain(double v) { return {v, std::nullopt, std::nullopt}; }
Measured banded(double v, double target, double tol) { return {v, target, tol}; }

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// Pump power only moves the accidental floor, not the spectrum.
bool same_spectrum(const SourceSpec& a, const SourceSpec& b) {
    return a.phase_matching_fwhm_hz == b.phase_matching_fwhm_hz && a.envelope_shape == b.envelope_shape;
}

// Acceptance bands that apply to an unmodified preset run.
struct PresetTargets {
    std::optional<double> revival_count;
    std::optional<double> revival_spacing_ps;
    std::optional<double> k_time;
    double k_time_tol = 0.05;
    std::optional<double> time_dimensionality;
    std::optional<double> total_dimensionality;
};

PresetTargets targets_for(const RunConfig& c) {
    PresetTargets t;
    if (c.preset.empty() || !near(c.hom.window_ps, 340.0)) return t;
    const RunConfig defaults = config_for_preset(c.preset);
    if (!(c.cavity == defaults.cavity) || !same_spectrum(c.source, defaults.source)) return t;
    if (c.preset == "45ghz") {
        t.revival_count = 61;
        t.revival_spacing_ps = 11.03;
        t.k_time = 18.30;
        t.time_dimensionality = 324;
        t.total_dimensionality = 648;
    } else if (c.preset == "15ghz") {
        t.k_time = 6.71;
        t.k_time_tol = 0.15;
    } else if (c.preset == "5ghz") {
        t.revival_count = 7;
        t.k_time = 5.16;
    }
    return t;
}

Measured maybe_banded(double v, std::optional<double> target, double tol) {
    return target ? banded(v, *target, tol) : plain(v);
}

json measured_json(const Measured& m) {
    return {{"value", m.value},
            {"target", m.target ? json(*m.target) : json(nullptr)},
            {"tolerance", m.tolerance ? json(*m.tolerance) : json(nullptr)}};
}

std::optional<double> opt_number(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

Measured measured_from(const json& j) { return {j.at("value").get<double>(), opt_number(j, "target"), opt_number(j, "tolerance")}; }

json opt_measured_json(const std::optional<Measured>& m) { return m ? measured_json(*m) : json(nullptr); }

std::optional<Measured> opt_measured_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return measured_from(j);
}

// Field table shared by serialization and parsing.
template <class Report, class Fn>
void for_each_measured(Report& r, Fn&& fn) {
    fn("revival_count", r.revival_count);
    fn("revival_spacing_ps", r.revival_spacing_ps);
    fn("central_dip_width_ps", r.central_dip_width_ps);
    fn("k_time_theory", r.k_time_theory);
    fn("k_time_fitted", r.k_time_fitted);
    fn("k_freq_ideal", r.k_freq_ideal);
    fn("k_freq_degraded", r.k_freq_degraded);
    fn("n_time_bins", r.n_time_bins);
    fn("n_freq_bins", r.n_freq_bins);
    fn("product_nt_nomega", r.product_nt_nomega);
    fn("product_kt_komega", r.product_kt_komega);
    fn("time_dimensionality", r.time_dimensionality);
    fn("total_dimensionality", r.total_dimensionality);
    fn("s_fringe", r.s_fringe);
    fn("s_fringe_fitted", r.s_fringe_fitted);
    fn("s_analytic", r.s_analytic);
    fn("s_counts", r.s_counts);
    fn("s_counts_sigma", r.s_counts_sigma);
}

}  // namespace

std::optional<bool> Measured::within() const {
    if (!target || !tolerance) return std::nullopt;
    return std::abs(value - *target) <= *tolerance + 1e-12;
}

HomResult run_hom(const RunConfig& config) {
    config.validate();
    HomResult out;
    out.comb = build_comb(config.cavity, config.source, config.n_max, &out.warnings);
    const HomOptions options{config.hom.points_per_linewidth, config.hom.accidental_fraction};

    const auto delays = delay_grid(config.hom.window_ps, config.hom.step_ps);
    out.trace = simulate_hom_trace(out.comb, delays, options);
    out.revivals = locate_revivals(out.trace);
    out.warnings.insert(out.warnings.end(), out.revivals.warnings.begin(), out.revivals.warnings.end());

    const double spacing = out.trace.revival_spacing_ps();
    const double fine_window = std::min(0.45 * spacing, 25.0);
    const auto fine = simulate_hom_trace(out.comb, delay_grid(fine_window, config.hom.width_step_ps), options);
    out.central_dip_width_ps = central_dip_width(fine, config.hom.width_threshold);

    std::vector<double> centers;
    for (const auto& r : out.revivals.records) centers.push_back(r.n * spacing);
    const auto exact = simulate_hom_trace(out.comb, centers, options);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const auto& r = out.revivals.records[i];
        out.visibility_table.push_back({r.n, r.visibility, 1.0 - exact.coincidence[i],
                                        (1.0 - config.hom.accidental_fraction) *
                                            dip_visibility_from_decay(std::abs(r.n) * out.comb.decay_per_round_trip())});
    }
    return out;
}

JsiResult run_jsi(const RunConfig& config) {
    config.validate();
    const CombSpectrum comb = build_comb(config.cavity, config.source, config.n_max);
    JsiResult out;
    out.ideal = schmidt_decompose(jsa_from_jsi(ideal_jsi(comb)));
    const auto floor = AccidentalModel::calibrated(config.source.pump_power_mw);
    out.relative_floor = floor.relative_floor();
    out.scan = scan_correlation_matrix(comb, config.jsi.signal, config.jsi.idler, config.jsi.bins, floor);
    out.degraded = schmidt_decompose(jsa_from_jsi(out.scan));
    out.crosstalk_db = crosstalk_db(out.scan);
    return out;
}

SchmidtSpectrum run_schmidt(const Jsi& jsi) { return schmidt_decompose(jsa_from_jsi(jsi)); }

ChshRun run_chsh(const RunConfig& config) {
    config.validate();
    const auto& c = config.chsh;
    std::mt19937_64 rng(c.seed);
    ChshRun out;
    const auto angles = angle_grid(0.0, 360.0, c.scan_points);
    for (double fixed : c.fixed_angles_deg) {
        out.scans.push_back(simulate_fringe_scan(fixed, angles, c.visibility, c.integration, rng));
        out.fits.push_back(fit_fringe(out.scans.back(), c.accidental_counts));
    }
    double sum = 0.0;
    for (const auto& f : out.fits) sum += f.visibility;
    out.mean_visibility = out.fits.empty() ? 0.0 : sum / static_cast<double>(out.fits.size());
    out.s_fringe_fitted = s_fringe_from_visibility(std::min(1.0, out.mean_visibility));
    out.analytic = s_chsh_from_visibility(c.visibility, c.angles);
    out.counted = s_chsh_from_counts(simulate_chsh_counts(c.visibility, c.angles, c.integration, rng));
    return out;
}

OutputLock::OutputLock(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw RuntimeError("output", "cannot create " + dir.string() + ": " + ec.message());
    const auto lock_path = dir / ".bfc.lock";
    fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw RuntimeError("output", "cannot open " + lock_path.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw RuntimeError("output", dir.string() + " is in use by another bfc process");
    }
}

OutputLock::~OutputLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

void write_hom_artifacts(const HomResult& hom, const std::filesystem::path& dir) {
    write_text_file(dir / "hom_trace.csv", hom_trace_csv(hom.trace));
    write_text_file(dir / "revivals.csv", revivals_csv(hom.revivals.records));
}

void write_jsi_artifacts(const JsiResult& jsi, const std::filesystem::path& dir) {
    write_text_file(dir / "jsi_scan.csv", jsi_csv(jsi.scan));
    write_text_file(dir / "schmidt_freq_ideal.csv", spectrum_csv(jsi.ideal));
    write_text_file(dir / "schmidt_freq_scan.csv", spectrum_csv(jsi.degraded));
}

void write_chsh_artifacts(const ChshRun& chsh, const std::filesystem::path& dir) {
    for (const auto& scan : chsh.scans) {
        std::ostringstream name;
        name << "fringe_phi1_" << format_double(scan.fixed_angle_deg) << ".csv";
        write_text_file(dir / name.str(), fringe_csv(scan));
    }
}

ReproReport run_report(const RunConfig& config) {
    stage("config", [&] { config.validate(); });
    const auto& dir = config.output_dir;
    OutputLock lock(dir);
    const PresetTargets targets = targets_for(config);
    const bool default_source = same_spectrum(config.source, SourceSpec{});

    ReproReport r;
    r.cavity_label = config.cavity.label();
    r.fsr_ghz = config.cavity.fsr_hz() / 1e9;
    r.linewidth_ghz = config.cavity.linewidth_fwhm_hz() / 1e9;
    r.finesse = config.cavity.finesse();
    r.round_trip_ps = config.cavity.round_trip_ps();
    r.n_max = config.n_max;
    r.config_hash = config_hash(config);
    r.tool_version = kToolVersion;
    r.schema_version = kConfigSchemaVersion;
    r.seed = config.chsh.seed;

    const HomResult hom = stage("hom", [&] { return run_hom(config); });
    stage("hom", [&] { write_hom_artifacts(hom, dir); });
    r.warnings = hom.warnings;
    r.revival_count = maybe_banded(static_cast<double>(hom.revivals.records.size()), targets.revival_count, 0.0);
    double spacing = hom.trace.revival_spacing_ps();
    if (hom.revivals.records.size() >= 2) {
        const auto& first = hom.revivals.records.front();
        const auto& last = hom.revivals.records.back();
        spacing = (last.center_ps - first.center_ps) / (last.n - first.n);
    }
    r.revival_spacing_ps = maybe_banded(spacing, targets.revival_spacing_ps, 0.05);
    r.central_dip_width_ps = default_source ? banded(hom.central_dip_width_ps, 3.85, 0.65) : plain(hom.central_dip_width_ps);
    r.visibility_table = hom.visibility_table;

    const TimeBinFit fit = stage("time-bin fit", [&] {
        std::vector<VisibilityPoint> points;
        for (const auto& row : hom.visibility_table)
            if (row.n != 0) points.push_back({row.n, row.located});
        r.time_bin_n_max = window_limited_n_max(config.cavity, config.hom.window_ps);
        return time_bin_spectrum_from_visibilities(points, r.time_bin_n_max);
    });
    const auto theory = time_bin_eigenvalues(config.cavity, r.time_bin_n_max);
    stage("time-bin fit", [&] {
        write_text_file(dir / "schmidt_time_theory.csv", spectrum_csv(theory));
        write_text_file(dir / "schmidt_time_fitted.csv", spectrum_csv(fit.spectrum));
    });
    r.fitted_decay_per_bin = fit.decay_per_bin;
    r.k_time_theory = maybe_banded(theory.k_number, targets.k_time, targets.k_time_tol);
    r.k_time_fitted = maybe_banded(fit.spectrum.k_number, targets.k_time, targets.k_time_tol);

    const JsiResult jsi = stage("jsi", [&] { return run_jsi(config); });
    stage("jsi", [&] { write_jsi_artifacts(jsi, dir); });
    r.k_freq_ideal = plain(jsi.ideal.k_number);
    r.k_freq_degraded = plain(jsi.degraded.k_number);
    if (jsi.crosstalk_db) {
        const bool closure = config.jsi.signal.fwhm_hz == 0.0 && config.jsi.idler.fwhm_hz == 0.0;
        const double p = config.source.pump_power_mw;
        std::optional<double> target;
        if (closure && near(p, 2.0)) target = -11.71;
        if (closure && near(p, 4.0)) target = -6.31;
        r.crosstalk_db = maybe_banded(*jsi.crosstalk_db, target, 0.1);
    }

    const BinCounts counts = bin_counts(config.cavity, config.source, config.hom.window_ps);
    const DimensionalityReport dims = stage("dimensionality", [&] {
        return dimensionality_report(fit.spectrum.k_number, jsi.ideal.k_number, counts);
    });
    r.n_time_bins = plain(counts.n_time_bins);
    r.n_freq_bins = plain(counts.n_freq_bins);
    r.product_nt_nomega = plain(dims.product_nt_nomega);
    r.product_kt_komega = plain(dims.product_kt_komega);
    r.time_dimensionality = maybe_banded(static_cast<double>(dims.time_dimensionality), targets.time_dimensionality, 0.0);
    r.total_dimensionality =
        maybe_banded(static_cast<double>(dims.total_dimensionality), targets.total_dimensionality, 0.0);

    const ChshRun chsh = stage("chsh", [&] { return run_chsh(config); });
    stage("chsh", [&] { write_chsh_artifacts(chsh, dir); });
    const double v = config.chsh.visibility;
    const double s_conf = s_fringe_from_visibility(v);
    r.s_fringe = near(v, 0.9796) ? banded(s_conf, 2.771, 0.002) : plain(s_conf);
    r.s_fringe_fitted = plain(chsh.s_fringe_fitted);
    r.s_analytic = near(v, 0.9497) ? banded(chsh.analytic.s_value, 2.686, 0.002) : plain(chsh.analytic.s_value);
    r.s_counts = plain(chsh.counted.s_value);
    r.s_counts_sigma = plain(chsh.counted.s_sigma);
    if (chsh.counted.violation_sigmas) r.violation_sigmas = plain(*chsh.counted.violation_sigmas);

    stage("output", [&] {
        write_text_file(dir / "report.json", report_to_json(r));
        write_text_file(dir / "summary.txt", report_summary(r));
    });
    return r;
}

std::string report_to_json(const ReproReport& r) {
    json j;
    j["cavity"] = {{"label", r.cavity_label},
                   {"fsr_ghz", r.fsr_ghz},
                   {"linewidth_ghz", r.linewidth_ghz},
                   {"finesse", r.finesse},
                   {"round_trip_ps", r.round_trip_ps},
                   {"n_max", r.n_max}};
    json measured;
    for_each_measured(r, [&](const char* key, const Measured& m) { measured[key] = measured_json(m); });
    measured["crosstalk_db"] = opt_measured_json(r.crosstalk_db);
    measured["violation_sigmas"] = opt_measured_json(r.violation_sigmas);
    j["measured"] = measured;
    j["time_bin_n_max"] = r.time_bin_n_max;
    j["fitted_decay_per_bin"] = r.fitted_decay_per_bin;
    json table = json::array();
    for (const auto& row : r.visibility_table)
        table.push_back({{"n", row.n},
                         {"located", row.located},
                         {"on_revival", row.on_revival},
                         {"closed_form", row.closed_form}});
    j["visibility_table"] = table;
    j["warnings"] = r.warnings;
    j["provenance"] = {{"config_hash", r.config_hash},
                       {"tool_version", r.tool_version},
                       {"schema_version", r.schema_version},
                       {"seed", r.seed}};
    return j.dump(2) + "\n";
}

ReproReport report_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        ReproReport r;
        const auto& cav = j.at("cavity");
        r.cavity_label = cav.at("label").get<std::string>();
        r.fsr_ghz = cav.at("fsr_ghz").get<double>();
        r.linewidth_ghz = cav.at("linewidth_ghz").get<double>();
        r.finesse = cav.at("finesse").get<double>();
        r.round_trip_ps = cav.at("round_trip_ps").get<double>();
        r.n_max = cav.at("n_max").get<int>();
        const auto& measured = j.at("measured");
        for_each_measured(r, [&](const char* key, Measured& m) { m = measured_from(measured.at(key)); });
        r.crosstalk_db = opt_measured_from(measured.at("crosstalk_db"));
        r.violation_sigmas = opt_measured_from(measured.at("violation_sigmas"));
        r.time_bin_n_max = j.at("time_bin_n_max").get<int>();
        r.fitted_decay_per_bin = j.at("fitted_decay_per_bin").get<double>();
        for (const auto& row : j.at("visibility_table"))
            r.visibility_table.push_back({row.at("n").get<int>(), row.at("located").get<double>(),
                                          row.at("on_revival").get<double>(), row.at("closed_form").get<double>()});
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        const auto& prov = j.at("provenance");
        r.config_hash = prov.at("config_hash").get<std::string>();
        r.tool_version = prov.at("tool_version").get<std::string>();
        r.schema_version = prov.at("schema_version").get<int>();
        r.seed = prov.at("seed").get<std::uint64_t>();
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("report JSON: ") + e.what());
    }
}

std::string report_summary(const ReproReport& r) {
    std::ostringstream os;
    os << "cavity " << r.cavity_label << ": FSR " << r.fsr_ghz << " GHz, linewidth " << r.linewidth_ghz
       << " GHz, finesse " << r.finesse << ", round trip " << r.round_trip_ps << " ps, n_max " << r.n_max << "\n\n";

    auto line = [&](const char* name, const Measured& m) {
        os << "  " << name << " = " << m.value;
        if (m.target) {
            os << "  (target " << *m.target << " +/- " << m.tolerance.value_or(0.0) << ": "
               << (*m.within() ? "ok" : "OUT OF BAND") << ")";
        }
        os << '\n';
    };
    const ReproReport& cr = r;
    for_each_measured(cr, line);
    if (r.crosstalk_db)
        line("crosstalk_db", *r.crosstalk_db);
    else
        os << "  crosstalk_db = -inf\n";
    if (r.violation_sigmas)
        line("violation_sigmas", *r.violation_sigmas);
    else
        os << "  violation_sigmas = none (S <= 2)\n";
    os << "  time_bin_n_max = " << r.time_bin_n_max << ", fitted decay per bin = " << r.fitted_decay_per_bin << '\n';

    os << "\nrevival visibilities (n, located, on revival, closed form):\n";
    for (const auto& row : r.visibility_table)
        if (std::abs(row.n) <= 10)
            os << "  " << row.n << "  " << row.located << "  " << row.on_revival << "  " << row.closed_form << '\n';

    if (!r.warnings.empty()) {
        os << "\nwarnings:\n";
        for (const auto& w : r.warnings) os << "  " << w << '\n';
    }
    os << "\nconfig hash " << r.config_hash << ", bfc " << r.tool_version << ", schema " << r.schema_version
       << ", seed " << r.seed << '\n';
    return os.str();
}

}  // namespace bfc
