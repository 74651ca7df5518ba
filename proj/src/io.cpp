#include "bfc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "bfc/errors.hpp"

namespace bfc {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(line);
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

[[noreturn]] void bad(const std::string& origin, std::size_t line, const std::string& what) {
    throw ValidationError(origin + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& s, const std::string& origin, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) bad(origin, line, "not a number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& origin, std::size_t line) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) bad(origin, line, "not an integer: '" + s + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

std::string hom_trace_csv(const HomTrace& trace) {
    std::string out = "delay_ps,coincidence\n";
    for (std::size_t i = 0; i < trace.delays_ps.size(); ++i)
        out += format_double(trace.delays_ps[i]) + ',' + format_double(trace.coincidence[i]) + '\n';
    return out;
}

std::string revivals_csv(const std::vector<RevivalRecord>& records) {
    std::string out = "n,center_ps,visibility\n";
    for (const auto& r : records)
        out += std::to_string(r.n) + ',' + format_double(r.center_ps) + ',' + format_double(r.visibility) + '\n';
    return out;
}

std::string spectrum_csv(const SchmidtSpectrum& s) {
    std::string out = "n,eigenvalue\n";
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
        out += std::to_string(s.mode_index[i]) + ',' + format_double(s.eigenvalues[i]) + '\n';
    return out;
}

std::string fringe_csv(const FringeScan& scan) {
    std::string out = "phi2_deg,counts\n";
    for (std::size_t i = 0; i < scan.counts.size(); ++i)
        out += format_double(scan.scan_angles_deg[i]) + ',' + std::to_string(scan.counts[i]) + '\n';
    return out;
}

std::string jsi_csv(const Jsi& jsi) {
    const BinRange r = jsi.range();
    std::string out = "signal\\idler";
    for (int ni = r.first; ni <= r.last; ++ni) out += ',' + std::to_string(ni);
    out += '\n';
    for (int ns = r.first; ns <= r.last; ++ns) {
        out += std::to_string(ns);
        for (int ni = r.first; ni <= r.last; ++ni) out += ',' + format_double(jsi.at(ns, ni));
        out += '\n';
    }
    return out;
}

Jsi parse_jsi_csv(const std::string& text, const std::string& origin) {
    const auto lines = lines_of(text);
    if (lines.size() < 2) bad(origin, 1, "expected a header row and at least one data row");

    const auto header = split_fields(lines[0]);
    if (header.size() < 2) bad(origin, 1, "header needs at least one idler bin");
    std::vector<int> idler;
    for (std::size_t j = 1; j < header.size(); ++j) idler.push_back(parse_int(header[j], origin, 1));
    for (std::size_t j = 1; j < idler.size(); ++j)
        if (idler[j] != idler[j - 1] + 1) bad(origin, 1, "idler bins must be consecutive and ascending");

    const BinRange range{idler.front(), idler.back()};
    if (lines.size() - 1 != static_cast<std::size_t>(range.size()))
        bad(origin, lines.size(), "matrix must be square: " + std::to_string(lines.size() - 1) + " rows for " +
                                      std::to_string(range.size()) + " columns");

    Eigen::MatrixXd values(range.size(), range.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != header.size())
            bad(origin, i + 1, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        const int ns = parse_int(fields[0], origin, i + 1);
        if (ns != range.first + static_cast<int>(i) - 1) bad(origin, i + 1, "signal bins must match the idler bins");
        for (std::size_t j = 1; j < fields.size(); ++j)
            values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                parse_number(fields[j], origin, i + 1);
    }
    return Jsi(range, std::move(values), false);
}

std::vector<VisibilityPoint> parse_visibility_csv(const std::string& text, const std::string& origin) {
    const auto lines = lines_of(text);
    if (lines.empty() || split_fields(lines[0]) != std::vector<std::string>{"n", "visibility"})
        bad(origin, 1, "header must be 'n,visibility'");
    std::vector<VisibilityPoint> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 2) bad(origin, i + 1, "expected 2 fields");
        out.push_back({parse_int(fields[0], origin, i + 1), parse_number(fields[1], origin, i + 1)});
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("io", "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw RuntimeError("io", "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("io", "cannot open " + path.string() + " for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Jsi read_jsi_csv(const std::filesystem::path& path) { return parse_jsi_csv(read_text_file(path), path.string()); }

std::vector<VisibilityPoint> read_visibility_csv(const std::filesystem::path& path) {
    return parse_visibility_csv(read_text_file(path), path.string());
}

}  // namespace bfc
