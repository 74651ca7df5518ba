#pragma once

// Run configuration: cavity presets and the key-value config schema.
//
//   [cavity]  preset = 45ghz            (or fsr_ghz / linewidth_ghz / label)
//   [source]  bpm_ghz = 245  envelope = "sinc_squared"  pump_mw = 2  wavelength_nm = 1316
//   [comb]    n_max = 16
//   [hom]     window_ps  step_ps  points_per_linewidth  accidental_fraction
//             width_step_ps  width_threshold
//   [jsi]     filter_pm | filter_ghz  filter_shape  bin_first  bin_last
//   [chsh]    visibility  angles = "90,45,112.5,157.5"  integration  seed
//             scan_points  accidental_counts
//   [output]  dir
//
// Only [cavity] is required. Unknown sections or keys are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bfc/bell_chsh.hpp"
#include "bfc/comb_model.hpp"
#include "bfc/spectral_corr.hpp"

namespace bfc {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

struct CavityPreset {
    std::string name;
    double fsr_hz;
    double linewidth_hz;
    double filter_fwhm_pm;  // tunable filter bandwidth used for its correlation scans
    int jsi_half_range;     // scanned bins ±half_range
};

[[nodiscard]] const std::vector<CavityPreset>& cavity_presets();
/// Looks up "45ghz", "15ghz" or "5ghz". Throws ValidationError for other names.
[[nodiscard]] const CavityPreset& find_preset(const std::string& name);
[[nodiscard]] CavitySpec preset_cavity(const std::string& name);

struct HomConfig {
    double window_ps = 340.0;
    double step_ps = 0.2;
    int points_per_linewidth = 32;
    double accidental_fraction = 0.0;
    /// Fine grid used to resolve the central dip width.
    double width_step_ps = 0.02;
    double width_threshold = 0.01;
};

struct JsiConfig {
    FilterSpec signal;
    FilterSpec idler;
    BinRange bins{-2, 2};
};

struct ChshConfig {
    double visibility = 0.9796;
    ChshAngles angles;
    double integration = 800.0;
    std::uint64_t seed = 1;
    int scan_points = 36;
    std::vector<double> fixed_angles_deg{45.0, 90.0, 135.0, 180.0};
    double accidental_counts = 0.0;
};

struct RunConfig {
    std::string preset;  // empty for a custom cavity
    CavitySpec cavity{45.32e9, 1.56e9, "45ghz"};
    SourceSpec source;
    int n_max = 16;
    HomConfig hom;
    JsiConfig jsi;
    ChshConfig chsh;
    std::filesystem::path output_dir = "bfc_out";

    /// Checks cross-field invariants; throws ValidationError naming the one violated.
    void validate() const;
};

/// Defaults for a named preset: default n_max, matched filters and bin range.
[[nodiscard]] RunConfig config_for_preset(const std::string& name);

/// Parses the key-value schema. `origin` names the source in error messages.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Deterministic text form of a resolved config (used for provenance hashing).
[[nodiscard]] std::string canonical_config(const RunConfig& config);
/// FNV-1a 64-bit hash, lowercase hex.
[[nodiscard]] std::string config_hash(const RunConfig& config);

[[nodiscard]] ChshAngles parse_angles(const std::string& csv);
[[nodiscard]] BinRange parse_bin_range(const std::string& text);  // "lo:hi"

}  // namespace bfc
