#pragma once

// CSV persistence. Every file has a header row, uses '.' as the decimal
// point, prints doubles with round-trip precision and ends with a newline.
// Layouts are documented in docs/formats.md.

#include <filesystem>
#include <string>
#include <vector>

#include "bfc/bell_chsh.hpp"
#include "bfc/hom_sim.hpp"
#include "bfc/schmidt.hpp"
#include "bfc/spectral_corr.hpp"

namespace bfc {

/// Round-trip decimal representation, locale independent.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string hom_trace_csv(const HomTrace& trace);             // delay_ps,coincidence
[[nodiscard]] std::string revivals_csv(const std::vector<RevivalRecord>& r);  // n,center_ps,visibility
[[nodiscard]] std::string spectrum_csv(const SchmidtSpectrum& s);           // n,eigenvalue
[[nodiscard]] std::string fringe_csv(const FringeScan& scan);               // phi2_deg,counts
/// Square matrix: header `signal\idler,<idler bins...>`, then one row per signal bin.
[[nodiscard]] std::string jsi_csv(const Jsi& jsi);

[[nodiscard]] Jsi parse_jsi_csv(const std::string& text, const std::string& origin = "<jsi>");
[[nodiscard]] std::vector<VisibilityPoint> parse_visibility_csv(const std::string& text,
                                                                const std::string& origin = "<visibilities>");

/// Throws RuntimeError("io", ...) naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

[[nodiscard]] Jsi read_jsi_csv(const std::filesystem::path& path);
[[nodiscard]] std::vector<VisibilityPoint> read_visibility_csv(const std::filesystem::path& path);

}  // namespace bfc
