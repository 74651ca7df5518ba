// bfc: biphoton frequency comb simulator.
//
//   bfc hom     HOM trace, revivals, central dip width
//   bfc jsi     filtered correlation matrix, cross-talk, K_Ω
//   bfc schmidt Schmidt spectra (from a JSI CSV, a visibility CSV, or the model)
//   bfc chsh    fringe scans and CHSH statistics
//   bfc report  full pipeline, all artifacts plus report.json and summary.txt
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "bfc/config.hpp"
#include "bfc/errors.hpp"
#include "bfc/io.hpp"
#include "bfc/report.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "Key-value config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", f.preset, "Cavity preset: 45ghz, 15ghz, 5ghz");
    cmd->add_option("--seed", f.seed, "Random seed for counting noise");
    cmd->add_option("--out", f.out, "Output directory (overrides BFC_OUTPUT_DIR and the config)");
}

bfc::RunConfig resolve(const CommonFlags& f) {
    if (!f.config_path.empty() && !f.preset.empty())
        throw bfc::ValidationError("give either --config or --preset, not both");
    bfc::RunConfig c = !f.config_path.empty() ? bfc::load_config(f.config_path)
                                              : bfc::config_for_preset(f.preset.empty() ? "45ghz" : f.preset);
    if (f.seed) c.chsh.seed = *f.seed;
    if (const char* env = std::getenv("BFC_OUTPUT_DIR"); env != nullptr && *env != '\0') c.output_dir = env;
    if (!f.out.empty()) c.output_dir = f.out;
    return c;
}

void print_spectrum(const char* title, const bfc::SchmidtSpectrum& s) {
    std::cout << title << ": K = " << s.k_number << " over " << s.eigenvalues.size() << " modes\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biphoton frequency comb simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version",
                         std::string("bfc ") + bfc::kToolVersion + " (config schema " +
                             std::to_string(bfc::kConfigSchemaVersion) + ")");

    CommonFlags hom_f, jsi_f, sch_f, chsh_f, rep_f;

    auto* hom = app.add_subcommand("hom", "Simulate the HOM trace and locate revivals");
    add_common(hom, hom_f);
    std::optional<double> window_ps, step_ps, accidentals;
    hom->add_option("--window-ps", window_ps, "Delay half-window in ps");
    hom->add_option("--step-ps", step_ps, "Delay step in ps");
    hom->add_option("--accidentals", accidentals, "Accidental fraction (0.015 is typical)");

    auto* jsi = app.add_subcommand("jsi", "Simulate a filtered correlation scan");
    add_common(jsi, jsi_f);
    std::optional<double> pump_mw, filter_pm;
    std::string bins, jsi_input;
    jsi->add_option("--pump-mw", pump_mw, "Pump power in mW");
    jsi->add_option("--filter-pm", filter_pm, "Filter FWHM in pm (0 for ideal bin selection)");
    jsi->add_option("--bins", bins, "Scanned bin range lo:hi");
    jsi->add_option("--input", jsi_input, "Analyze a JSI CSV instead of simulating")->check(CLI::ExistingFile);

    auto* sch = app.add_subcommand("schmidt", "Schmidt decomposition");
    add_common(sch, sch_f);
    std::string sch_input, vis_input;
    std::optional<int> time_n_max;
    sch->add_option("--input", sch_input, "JSI CSV to decompose")->check(CLI::ExistingFile);
    sch->add_option("--visibilities", vis_input, "n,visibility CSV of revival visibilities")->check(CLI::ExistingFile);
    sch->add_option("--n-max", time_n_max, "Time bins per side (default: window limited)");

    auto* chsh = app.add_subcommand("chsh", "Fringe scans and CHSH statistics");
    add_common(chsh, chsh_f);
    std::optional<double> visibility, integration;
    std::string angles;
    chsh->add_option("--visibility", visibility, "Two-photon visibility");
    chsh->add_option("--angles", angles, "a,a',b,b' in degrees");
    chsh->add_option("--integration", integration, "Expected counts at the fringe maximum");

    auto* rep = app.add_subcommand("report", "Run the full reproduction pipeline");
    add_common(rep, rep_f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*hom) {
            auto c = resolve(hom_f);
            if (window_ps) c.hom.window_ps = *window_ps;
            if (step_ps) c.hom.step_ps = *step_ps;
            if (accidentals) c.hom.accidental_fraction = *accidentals;
            bfc::OutputLock lock(c.output_dir);
            const auto r = bfc::run_hom(c);
            bfc::write_hom_artifacts(r, c.output_dir);
            std::cout << "revivals: " << r.revivals.records.size() << " (spacing "
                      << r.trace.revival_spacing_ps() << " ps)\n"
                      << "central dip width: " << r.central_dip_width_ps << " ps\n";
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
        } else if (*jsi) {
            if (!jsi_input.empty()) {
                const auto m = bfc::read_jsi_csv(jsi_input);
                const auto x = bfc::crosstalk_db(m);
                std::cout << "crosstalk: ";
                if (x)
                    std::cout << *x << " dB\n";
                else
                    std::cout << "-inf dB\n";
                print_spectrum("frequency-bin Schmidt number", bfc::run_schmidt(m));
                return 0;
            }
            auto c = resolve(jsi_f);
            if (pump_mw) c.source.pump_power_mw = *pump_mw;
            if (filter_pm) {
                const double hz = bfc::filter_fwhm_from_pm(*filter_pm, c.source.degenerate_wavelength_nm);
                c.jsi.signal.fwhm_hz = c.jsi.idler.fwhm_hz = hz;
            }
            if (!bins.empty()) c.jsi.bins = bfc::parse_bin_range(bins);
            bfc::OutputLock lock(c.output_dir);
            const auto r = bfc::run_jsi(c);
            bfc::write_jsi_artifacts(r, c.output_dir);
            std::cout << "crosstalk: ";
            if (r.crosstalk_db)
                std::cout << *r.crosstalk_db << " dB\n";
            else
                std::cout << "-inf dB\n";
            print_spectrum("ideal K_freq", r.ideal);
            print_spectrum("scanned K_freq", r.degraded);
        } else if (*sch) {
            auto c = resolve(sch_f);
            c.validate();
            bfc::OutputLock lock(c.output_dir);
            const int n_max = time_n_max.value_or(bfc::window_limited_n_max(c.cavity, c.hom.window_ps));
            if (!sch_input.empty()) {
                const auto s = bfc::run_schmidt(bfc::read_jsi_csv(sch_input));
                bfc::write_text_file(c.output_dir / "schmidt_freq.csv", bfc::spectrum_csv(s));
                print_spectrum("frequency-bin Schmidt number", s);
            } else if (!vis_input.empty()) {
                const auto points = bfc::read_visibility_csv(vis_input);
                const auto fit = bfc::time_bin_spectrum_from_visibilities(points, n_max);
                bfc::write_text_file(c.output_dir / "schmidt_time_fitted.csv", bfc::spectrum_csv(fit.spectrum));
                std::cout << "fitted decay per bin: " << fit.decay_per_bin << " (finesse " << fit.implied_finesse
                          << ")\n";
                print_spectrum("time-bin Schmidt number", fit.spectrum);
            } else {
                const auto t = bfc::time_bin_eigenvalues(c.cavity, n_max);
                bfc::write_text_file(c.output_dir / "schmidt_time_theory.csv", bfc::spectrum_csv(t));
                print_spectrum("time-bin Schmidt number", t);
            }
        } else if (*chsh) {
            auto c = resolve(chsh_f);
            if (visibility) c.chsh.visibility = *visibility;
            if (!angles.empty()) c.chsh.angles = bfc::parse_angles(angles);
            if (integration) c.chsh.integration = *integration;
            bfc::OutputLock lock(c.output_dir);
            const auto r = bfc::run_chsh(c);
            bfc::write_chsh_artifacts(r, c.output_dir);
            std::cout << "mean fringe visibility: " << r.mean_visibility << "\n"
                      << "S (fringe): " << r.s_fringe_fitted << "\n"
                      << "S (analytic): " << r.analytic.s_value << "\n"
                      << "S (counts): " << r.counted.s_value << " +/- " << r.counted.s_sigma;
            if (r.counted.violation_sigmas) std::cout << " (" << *r.counted.violation_sigmas << " sigma)";
            std::cout << '\n';
        } else if (*rep) {
            const auto c = resolve(rep_f);
            const auto r = bfc::run_report(c);
            std::cout << bfc::report_summary(r);
        }
    } catch (const bfc::ValidationError& e) {
        std::cerr << "bfc: invalid input: " << e.what() << '\n';
        return 1;
    } catch (const bfc::RuntimeError& e) {
        std::cerr << "bfc: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "bfc: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
