#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "bfc/config.hpp"
#include "bfc/errors.hpp"
#include "bfc/io.hpp"
#include "bfc/report.hpp"
#include "doctest.h"

using namespace bfc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("bfc_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + BFC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("preset") {
        const auto c = parse_config("[cavity]\npreset = 45ghz\n");
        CHECK(c.cavity.fsr_hz() == 45.32e9);
        CHECK(c.cavity.linewidth_fwhm_hz() == 1.56e9);
        CHECK(c.n_max == 16);
        CHECK(c.jsi.bins == BinRange{-2, 2});
        CHECK(c.jsi.signal.fwhm_hz == doctest::Approx(51.93e9).epsilon(1e-3));
    }
    SUBCASE("custom cavity and overrides") {
        const auto c = parse_config(
            "# comment\n[cavity]\nfsr_ghz = 20\nlinewidth_ghz = 1\nlabel = \"test\"\n"
            "[source]\nbpm_ghz = 100\nenvelope = gaussian\npump_mw = 4\n"
            "[hom]\nstep_ps = 0.1\n[jsi]\nfilter_ghz = 0\nbin_first = -1\nbin_last = 1\n"
            "[chsh]\nangles = 0,45,22.5,67.5\nseed = 9\n[output]\ndir = some/where\n");
        CHECK(c.cavity.label() == "test");
        CHECK(c.cavity.finesse() == doctest::Approx(20.0));
        CHECK(c.n_max == 15);
        CHECK(c.source.envelope_shape == Envelope::gaussian);
        CHECK(c.hom.step_ps == 0.1);
        CHECK(c.jsi.signal.fwhm_hz == 0.0);
        CHECK(c.chsh.angles.b == 22.5);
        CHECK(c.chsh.seed == 9);
        CHECK(c.output_dir == fs::path("some/where"));
    }
    SUBCASE("errors") {
        auto message = [](const std::string& text) {
            try {
                (void)parse_config(text, "cfg");
            } catch (const ValidationError& e) {
                return std::string(e.what());
            }
            return std::string("no error");
        };
        CHECK(contains(message("[source]\npump_mw = 2\n"), "[cavity]"));
        CHECK(contains(message("[cavity]\nfsr_ghz = 1\nlinewidth_ghz = 2\n"), "CavitySpec"));
        CHECK(contains(message("[cavity]\npreset = 45ghz\ncolour = red\n"), "colour"));
        CHECK(contains(message("[cavity]\npreset = 45ghz\n[extras]\nx = 1\n"), "[extras]"));
        CHECK(contains(message("[cavity]\npreset = 99ghz\n"), "99ghz"));
        CHECK(contains(message("[cavity]\npreset = 45ghz\n[hom]\nstep_ps = fast\n"), "step_ps"));
        CHECK(contains(message("[cavity]\npreset = 45ghz\n[hom]\npoints_per_linewidth = 4\n"), "points_per_linewidth"));
        CHECK(contains(message("[cavity]\npreset = 45ghz\n[jsi]\nbin_first = -40\n"), "bin range"));
        CHECK(contains(message("[cavity\npreset = 45ghz\n"), "cfg:1"));
    }
    CHECK_THROWS_AS((void)load_config("/nonexistent/bfc.ini"), ValidationError);
}

TEST_CASE("config hash") {
    const auto a = config_for_preset("45ghz");
    auto b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.chsh.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("small parsers") {
    CHECK(parse_bin_range("-9:9") == BinRange{-9, 9});
    CHECK_THROWS_AS((void)parse_bin_range("9"), ValidationError);
    CHECK_THROWS_AS((void)parse_bin_range("a:b"), ValidationError);
    CHECK(parse_angles("90, 45, 112.5, 157.5").b_prime == 157.5);
    CHECK_THROWS_AS((void)parse_angles("1,2,3"), ValidationError);
}

TEST_CASE("CSV formats") {
    SUBCASE("HOM trace is two columns") {
        HomTrace t;
        t.delays_ps = {-0.2, 0.0, 0.2};
        t.coincidence = {0.5, 0.0, 0.5};
        CHECK(hom_trace_csv(t) == "delay_ps,coincidence\n-0.2,0.5\n0,0\n0.2,0.5\n");
    }
    SUBCASE("spectrum") {
        SchmidtSpectrum s;
        s.eigenvalues = {0.5, 0.25, 0.25};
        s.mode_index = {0, -1, 1};
        CHECK(spectrum_csv(s) == "n,eigenvalue\n0,0.5\n-1,0.25\n1,0.25\n");
    }
    SUBCASE("doubles round-trip exactly") {
        for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-300}) CHECK(std::stod(format_double(v)) == v);
    }
    SUBCASE("JSI round trip") {
        Eigen::MatrixXd m(3, 3);
        m << 0.1, 0.2, 1.0 / 3.0, 0.0, 5.5, 1e-17, 2.0, 0.0, 0.25;
        const Jsi j(BinRange{-1, 1}, m, false);
        const std::string text = jsi_csv(j);
        CHECK(text.rfind("signal\\idler,-1,0,1\n", 0) == 0);
        CHECK(text.back() == '\n');
        const Jsi back = parse_jsi_csv(text);
        CHECK(back.range() == j.range());
        CHECK(back.values() == j.values());
    }
    SUBCASE("malformed JSI input names the line") {
        CHECK_THROWS_WITH_AS((void)parse_jsi_csv("signal\\idler,0,1\n0,1,2\n1,x,3\n", "m.csv"),
                             doctest::Contains("m.csv:3"), ValidationError);
        CHECK_THROWS_AS((void)parse_jsi_csv("signal\\idler,0,1\n0,1,2\n", "m.csv"), ValidationError);
        CHECK_THROWS_AS((void)parse_jsi_csv("signal\\idler,0,2\n0,1,2\n2,1,1\n", "m.csv"), ValidationError);
    }
    SUBCASE("visibilities") {
        const auto v = parse_visibility_csv("n,visibility\n1,0.99\n-2,0.97\n");
        REQUIRE(v.size() == 2);
        CHECK(v[1].n == -2);
        CHECK(v[1].visibility == 0.97);
        CHECK_THROWS_AS((void)parse_visibility_csv("a,b\n"), ValidationError);
    }
    SUBCASE("I/O failures carry the path") {
        CHECK_THROWS_WITH_AS(write_text_file("/nonexistent/dir/x.csv", "x"), doctest::Contains("/nonexistent/dir/x.csv"),
                             RuntimeError);
        CHECK_THROWS_WITH_AS((void)read_text_file("/nonexistent/y.csv"), doctest::Contains("/nonexistent/y.csv"),
                             RuntimeError);
    }
}

TEST_CASE("report pipeline") {
    TempDir tmp;
    auto config = config_for_preset("45ghz");
    config.output_dir = tmp.path / "a";
    const ReproReport r = run_report(config);

    CHECK(r.total_dimensionality.value == 648);
    CHECK(r.time_dimensionality.value == 324);
    CHECK(r.revival_count.value == 61);
    CHECK(*r.k_time_fitted.within());
    CHECK(r.k_time_theory.tolerance.has_value());
    CHECK(r.tool_version == kToolVersion);
    for (const char* f : {"hom_trace.csv", "revivals.csv", "jsi_scan.csv", "schmidt_time_fitted.csv",
                          "schmidt_time_theory.csv", "schmidt_freq_ideal.csv", "fringe_phi1_45.csv", "report.json",
                          "summary.txt"})
        CHECK(fs::exists(config.output_dir / f));

    SUBCASE("JSON round-trips") {
        const std::string json = read_text_file(config.output_dir / "report.json");
        const ReproReport back = report_from_json(json);
        CHECK(back == r);
        CHECK(report_to_json(back) == json);
        CHECK_THROWS_AS((void)report_from_json("{\"cavity\": 3}"), ValidationError);
    }
    SUBCASE("same seed, identical artifacts") {
        auto again = config;
        again.output_dir = tmp.path / "b";
        (void)run_report(again);
        for (const auto& entry : fs::directory_iterator(config.output_dir)) {
            const auto name = entry.path().filename();
            if (name == ".bfc.lock") continue;
            CHECK(read_text_file(entry.path()) == read_text_file(again.output_dir / name));
        }
    }
    SUBCASE("5 GHz preset") {
        auto c5 = config_for_preset("5ghz");
        c5.output_dir = tmp.path / "c";
        const auto r5 = run_report(c5);
        CHECK(r5.revival_count.value == 7);
        CHECK(std::abs(r5.k_time_fitted.value - 5.16) < 0.05);
    }
    SUBCASE("a busy output directory is refused") {
        OutputLock held(config.output_dir);
        CHECK_THROWS_AS((void)run_report(config), RuntimeError);
    }
    SUBCASE("stage failures name the stage and keep earlier artifacts") {
        auto bad = config;
        bad.output_dir = tmp.path / "d";
        bad.source.pump_power_mw = 20.0;
        try {
            (void)run_report(bad);
            FAIL("expected failure");
        } catch (const ValidationError& e) {
            CHECK(contains(e.what(), "jsi"));
        }
        CHECK(fs::exists(bad.output_dir / "hom_trace.csv"));
        CHECK_FALSE(fs::exists(bad.output_dir / "report.json"));
    }
}

TEST_CASE("command line") {
    TempDir tmp;
    const fs::path log = tmp.path / "log.txt";
    auto out = [&](const char* sub) { return (tmp.path / sub).string(); };

    CHECK(run_cli("--version", log) == 0);
    CHECK(contains(read_text_file(log), kToolVersion));
    CHECK(contains(read_text_file(log), "schema"));

    CHECK(run_cli("hom --preset 45ghz --out " + out("hom"), log) == 0);
    CHECK(contains(read_text_file(log), "revivals: 61"));
    CHECK(fs::exists(tmp.path / "hom" / "hom_trace.csv"));

    CHECK(run_cli("jsi --preset 45ghz --filter-pm 0 --out " + out("jsi"), log) == 0);
    CHECK(contains(read_text_file(log), "-11.71"));
    CHECK(run_cli("jsi --input " + out("jsi") + "/jsi_scan.csv", log) == 0);
    CHECK(run_cli("schmidt --input " + out("jsi") + "/jsi_scan.csv --out " + out("sch"), log) == 0);
    CHECK(fs::exists(tmp.path / "sch" / "schmidt_freq.csv"));

    write_text_file(tmp.path / "vis.csv", "n,visibility\n1,0.994558\n2,0.979726\n3,0.957485\n");
    CHECK(run_cli("schmidt --preset 45ghz --visibilities " + (tmp.path / "vis.csv").string() + " --out " + out("vis"),
                  log) == 0);
    CHECK(contains(read_text_file(log), "time-bin Schmidt number: K = 18.3"));

    CHECK(run_cli("chsh --visibility 0.9497 --seed 4 --out " + out("chsh"), log) == 0);
    CHECK(contains(read_text_file(log), "S (analytic): 2.686"));

    SUBCASE("exit codes") {
        CHECK(run_cli("", log) == 1);
        CHECK(run_cli("hom --preset 99ghz --out " + out("x"), log) == 1);
        CHECK(run_cli("hom --step-ps -1 --out " + out("x"), log) == 1);
        write_text_file(tmp.path / "bad.ini", "[cavity]\nfsr_ghz = 1\nlinewidth_ghz = 2\n");
        CHECK(run_cli("report --config " + (tmp.path / "bad.ini").string(), log) == 1);
        CHECK(contains(read_text_file(log), "CavitySpec"));
        write_text_file(tmp.path / "blocker", "");
        CHECK(run_cli("hom --out " + (tmp.path / "blocker").string(), log) == 2);
    }
    SUBCASE("environment selects the output directory") {
        const std::string env = "BFC_OUTPUT_DIR=\"" + out("env") + "\" ";
        const std::string cmd = env + "\"" + BFC_CLI_PATH + "\" chsh > \"" + log.string() + "\" 2>&1";
        CHECK(std::system(cmd.c_str()) == 0);
        CHECK(fs::exists(tmp.path / "env" / "fringe_phi1_90.csv"));
    }
}
