#include "bfc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "bfc/errors.hpp"

namespace bfc {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"cavity", {"preset", "fsr_ghz", "linewidth_ghz", "label"}},
        {"source", {"bpm_ghz", "envelope", "pump_mw", "wavelength_nm"}},
        {"comb", {"n_max"}},
        {"hom", {"window_ps", "step_ps", "points_per_linewidth", "accidental_fraction", "width_step_ps",
                 "width_threshold"}},
        {"jsi", {"filter_pm", "filter_ghz", "filter_shape", "bin_first", "bin_last"}},
        {"chsh", {"visibility", "angles", "integration", "seed", "scan_points", "accidental_counts"}},
        {"output", {"dir"}},
    };
    return s;
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
        v = v.substr(1, v.size() - 2);
    return v;
}

class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    [[nodiscard]] bool has(const std::string& key) const { return tree_ != nullptr && tree_->count(key) > 0; }

    [[nodiscard]] std::string text(const std::string& key) const {
        return unquote(tree_->get<std::string>(key));
    }

    [[nodiscard]] double number(const std::string& key) const {
        const std::string raw = text(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size() || !std::isfinite(v)) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("[" + name_ + "] " + key + ": expected a number, got '" + raw + "'");
        }
    }

    [[nodiscard]] long integer(const std::string& key) const {
        const std::string raw = text(key);
        try {
            std::size_t used = 0;
            const long v = std::stol(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("[" + name_ + "] " + key + ": expected an integer, got '" + raw + "'");
        }
    }

    void maybe(const std::string& key, double& out) const {
        if (has(key)) out = number(key);
    }

private:
    const pt::ptree* tree_;
    std::string name_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

}  // namespace

const std::vector<CavityPreset>& cavity_presets() {
    static const std::vector<CavityPreset> presets{
        {"45ghz", 45.32e9, 1.56e9, 300.0, 2},
        {"15ghz", 15.15e9, 1.36e9, 100.0, 9},
        {"5ghz", 5.03e9, 0.46e9, 100.0, 9},
    };
    return presets;
}

const CavityPreset& find_preset(const std::string& name) {
    for (const auto& p : cavity_presets())
        if (p.name == name) return p;
    throw ValidationError("unknown cavity preset '" + name + "' (expected 45ghz, 15ghz or 5ghz)");
}

CavitySpec preset_cavity(const std::string& name) {
    const auto& p = find_preset(name);
    return CavitySpec(p.fsr_hz, p.linewidth_hz, p.name);
}

void RunConfig::validate() const {
    source.validate();
    if (n_max < 0) throw ValidationError("[comb] n_max must be >= 0");
    if (!(hom.window_ps > 0.0)) throw ValidationError("[hom] window_ps must be > 0");
    if (!(hom.step_ps > 0.0)) throw ValidationError("[hom] step_ps must be > 0");
    if (!(hom.width_step_ps > 0.0)) throw ValidationError("[hom] width_step_ps must be > 0");
    if (hom.points_per_linewidth < 8)
        throw ValidationError("[hom] points_per_linewidth must be >= 8 (quadrature finer than linewidth/8)");
    if (!(hom.accidental_fraction >= 0.0 && hom.accidental_fraction < 1.0))
        throw ValidationError("[hom] accidental_fraction must lie in [0, 1)");
    if (!(hom.width_threshold > 0.0 && hom.width_threshold <= 0.5))
        throw ValidationError("[hom] width_threshold must lie in (0, 0.5]");
    jsi.signal.validate();
    jsi.idler.validate();
    if (jsi.bins.size() <= 0) throw ValidationError("[jsi] bin_last must be >= bin_first");
    if (jsi.bins.first < -n_max || jsi.bins.last > n_max)
        throw ValidationError("[jsi] bin range must lie within [-n_max, n_max]");
    if (!(chsh.visibility >= 0.0 && chsh.visibility <= 1.0))
        throw ValidationError("[chsh] visibility must lie in [0, 1]");
    if (!(chsh.integration > 0.0)) throw ValidationError("[chsh] integration must be > 0");
    if (chsh.scan_points < 6) throw ValidationError("[chsh] scan_points must be >= 6");
    if (!(chsh.accidental_counts >= 0.0)) throw ValidationError("[chsh] accidental_counts must be >= 0");
}

RunConfig config_for_preset(const std::string& name) {
    const auto& p = find_preset(name);
    RunConfig c;
    c.preset = p.name;
    c.cavity = CavitySpec(p.fsr_hz, p.linewidth_hz, p.name);
    c.n_max = default_n_max(c.cavity, c.source);
    const double fwhm = filter_fwhm_from_pm(p.filter_fwhm_pm, c.source.degenerate_wavelength_nm);
    c.jsi.signal.fwhm_hz = fwhm;
    c.jsi.idler.fwhm_hz = fwhm;
    c.jsi.bins = {-p.jsi_half_range, p.jsi_half_range};
    return c;
}

ChshAngles parse_angles(const std::string& csv) {
    std::vector<double> v;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("angles: '" + csv + "' is not a list of four numbers");
        }
    }
    if (v.size() != 4) throw ValidationError("angles: expected four values a,a',b,b' (degrees)");
    return {v[0], v[1], v[2], v[3]};
}

BinRange parse_bin_range(const std::string& text) {
    const auto colon = text.find(':', 1);
    try {
        if (colon == std::string::npos) throw std::invalid_argument(text);
        std::size_t u1 = 0;
        std::size_t u2 = 0;
        const std::string a = text.substr(0, colon);
        const std::string b = text.substr(colon + 1);
        BinRange r{std::stoi(a, &u1), std::stoi(b, &u2)};
        if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(text);
        return r;
    } catch (const std::exception&) {
        throw ValidationError("bin range '" + text + "' must look like lo:hi");
    }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    {
        std::istringstream in(text);
        try {
            pt::ini_parser::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            std::ostringstream os;
            os << origin << ":" << e.line() << ": parse error: " << e.message();
            throw ValidationError(os.str());
        }
    }

    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (body.empty()) {
            throw ValidationError(origin + ": key '" + section + "' outside of any [section]");
        }
        if (it == schema().end()) throw ValidationError(origin + ": unknown section [" + section + "]");
        for (const auto& kv : body)
            if (!it->second.contains(kv.first))
                throw ValidationError(origin + ": unknown key '" + kv.first + "' in [" + section + "]");
    }

    auto section = [&](const std::string& name) {
        const auto child = tree.get_child_optional(name);
        return Section(child ? &*child : nullptr, name);
    };

    const Section cav = section("cavity");
    if (!tree.get_child_optional("cavity"))
        throw ValidationError(origin + ": missing required section [cavity]");

    RunConfig c;
    if (cav.has("preset")) {
        if (cav.has("fsr_ghz") || cav.has("linewidth_ghz"))
            throw ValidationError("[cavity] give either preset or fsr_ghz/linewidth_ghz, not both");
        c = config_for_preset(cav.text("preset"));
    } else {
        if (!cav.has("fsr_ghz") || !cav.has("linewidth_ghz"))
            throw ValidationError("[cavity] needs preset, or both fsr_ghz and linewidth_ghz");
        const std::string label = cav.has("label") ? cav.text("label") : std::string("custom");
        c.preset.clear();
        c.cavity = CavitySpec(cav.number("fsr_ghz") * 1e9, cav.number("linewidth_ghz") * 1e9, label);
        c.n_max = default_n_max(c.cavity, c.source);
        c.jsi.bins = {-std::min(2, c.n_max), std::min(2, c.n_max)};
    }
    if (cav.has("label") && cav.has("preset"))
        c.cavity = CavitySpec(c.cavity.fsr_hz(), c.cavity.linewidth_fwhm_hz(), cav.text("label"));

    const Section src = section("source");
    bool bandwidth_changed = false;
    if (src.has("bpm_ghz")) {
        c.source.phase_matching_fwhm_hz = src.number("bpm_ghz") * 1e9;
        bandwidth_changed = true;
    }
    if (src.has("envelope")) c.source.envelope_shape = envelope_from_string(src.text("envelope"));
    src.maybe("pump_mw", c.source.pump_power_mw);
    src.maybe("wavelength_nm", c.source.degenerate_wavelength_nm);
    c.source.validate();

    const Section comb = section("comb");
    if (comb.has("n_max"))
        c.n_max = static_cast<int>(comb.integer("n_max"));
    else if (bandwidth_changed)
        c.n_max = default_n_max(c.cavity, c.source);

    const Section hom = section("hom");
    hom.maybe("window_ps", c.hom.window_ps);
    hom.maybe("step_ps", c.hom.step_ps);
    if (hom.has("points_per_linewidth"))
        c.hom.points_per_linewidth = static_cast<int>(hom.integer("points_per_linewidth"));
    hom.maybe("accidental_fraction", c.hom.accidental_fraction);
    hom.maybe("width_step_ps", c.hom.width_step_ps);
    hom.maybe("width_threshold", c.hom.width_threshold);

    const Section jsi = section("jsi");
    if (jsi.has("filter_pm") && jsi.has("filter_ghz"))
        throw ValidationError("[jsi] give either filter_pm or filter_ghz, not both");
    if (jsi.has("filter_pm")) {
        const double hz = filter_fwhm_from_pm(jsi.number("filter_pm"), c.source.degenerate_wavelength_nm);
        c.jsi.signal.fwhm_hz = c.jsi.idler.fwhm_hz = hz;
    }
    if (jsi.has("filter_ghz")) c.jsi.signal.fwhm_hz = c.jsi.idler.fwhm_hz = jsi.number("filter_ghz") * 1e9;
    if (jsi.has("filter_shape"))
        c.jsi.signal.shape = c.jsi.idler.shape = filter_shape_from_string(jsi.text("filter_shape"));
    if (jsi.has("bin_first")) c.jsi.bins.first = static_cast<int>(jsi.integer("bin_first"));
    if (jsi.has("bin_last")) c.jsi.bins.last = static_cast<int>(jsi.integer("bin_last"));

    const Section chsh = section("chsh");
    chsh.maybe("visibility", c.chsh.visibility);
    if (chsh.has("angles")) c.chsh.angles = parse_angles(chsh.text("angles"));
    chsh.maybe("integration", c.chsh.integration);
    if (chsh.has("seed")) {
        const long seed = chsh.integer("seed");
        if (seed < 0) throw ValidationError("[chsh] seed must be >= 0");
        c.chsh.seed = static_cast<std::uint64_t>(seed);
    }
    if (chsh.has("scan_points")) c.chsh.scan_points = static_cast<int>(chsh.integer("scan_points"));
    chsh.maybe("accidental_counts", c.chsh.accidental_counts);

    const Section out = section("output");
    if (out.has("dir")) c.output_dir = out.text("dir");

    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string canonical_config(const RunConfig& c) {
    std::ostringstream os;
    os << "schema=" << kConfigSchemaVersion << '\n'
       << "[cavity]\npreset=" << c.preset << "\nlabel=" << c.cavity.label() << "\nfsr_hz=" << fmt(c.cavity.fsr_hz())
       << "\nlinewidth_hz=" << fmt(c.cavity.linewidth_fwhm_hz()) << '\n'
       << "[source]\nbpm_hz=" << fmt(c.source.phase_matching_fwhm_hz) << "\nenvelope=" << to_string(c.source.envelope_shape)
       << "\npump_mw=" << fmt(c.source.pump_power_mw) << "\nwavelength_nm=" << fmt(c.source.degenerate_wavelength_nm)
       << "\n[comb]\nn_max=" << c.n_max << '\n'
       << "[hom]\nwindow_ps=" << fmt(c.hom.window_ps) << "\nstep_ps=" << fmt(c.hom.step_ps)
       << "\npoints_per_linewidth=" << c.hom.points_per_linewidth
       << "\naccidental_fraction=" << fmt(c.hom.accidental_fraction) << "\nwidth_step_ps=" << fmt(c.hom.width_step_ps)
       << "\nwidth_threshold=" << fmt(c.hom.width_threshold) << '\n';
    for (const auto* f : {&c.jsi.signal, &c.jsi.idler})
        os << "[jsi.filter]\nfwhm_hz=" << fmt(f->fwhm_hz) << "\nshape=" << to_string(f->shape)
           << "\ncenter_offset_bins=" << fmt(f->center_offset_bins) << '\n';
    os << "[jsi]\nbins=" << c.jsi.bins.first << ':' << c.jsi.bins.last << '\n'
       << "[chsh]\nvisibility=" << fmt(c.chsh.visibility) << "\nangles=" << fmt(c.chsh.angles.a) << ','
       << fmt(c.chsh.angles.a_prime) << ',' << fmt(c.chsh.angles.b) << ',' << fmt(c.chsh.angles.b_prime)
       << "\nintegration=" << fmt(c.chsh.integration) << "\nseed=" << c.chsh.seed
       << "\nscan_points=" << c.chsh.scan_points << "\naccidental_counts=" << fmt(c.chsh.accidental_counts)
       << "\nfixed=";
    for (double a : c.chsh.fixed_angles_deg) os << fmt(a) << ';';
    os << '\n';
    return os.str();
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace bfc
