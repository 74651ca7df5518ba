#pragma once

// The reproduction pipeline: hom -> revivals -> visibility fit -> K_T,
// ideal/degraded JSI -> K_Ω, bin counts, CHSH. Each stage is callable on
// its own for the CLI subcommands; run_report chains them and writes every
// artifact into the output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bfc/bell_chsh.hpp"
#include "bfc/config.hpp"
#include "bfc/hom_sim.hpp"
#include "bfc/schmidt.hpp"
#include "bfc/spectral_corr.hpp"

namespace bfc {

/// A reported number with the acceptance band it is checked against, if any.
struct Measured {
    double value = 0.0;
    std::optional<double> target;
    std::optional<double> tolerance;

    /// Empty when no band applies.
    [[nodiscard]] std::optional<bool> within() const;
    bool operator==(const Measured&) const = default;
};

struct VisibilityRow {
    int n = 0;
    double located = 0.0;      // from the located dip
    double on_revival = 0.0;   // trace evaluated exactly at n·ΔT/2
    double closed_form = 0.0;
    bool operator==(const VisibilityRow&) const = default;
};

struct HomResult {
    CombSpectrum comb;
    HomTrace trace;
    RevivalScan revivals;
    double central_dip_width_ps = 0.0;
    std::vector<VisibilityRow> visibility_table;
    std::vector<std::string> warnings;
};

struct JsiResult {
    SchmidtSpectrum ideal;
    Jsi scan{BinRange{0, 0}, Eigen::MatrixXd::Ones(1, 1), false};
    SchmidtSpectrum degraded;
    std::optional<double> crosstalk_db;
    double relative_floor = 0.0;
};

struct ChshRun {
    std::vector<FringeScan> scans;
    std::vector<FringeFit> fits;
    double mean_visibility = 0.0;
    double s_fringe_fitted = 0.0;
    ChshResult analytic;
    ChshResult counted;
};

[[nodiscard]] HomResult run_hom(const RunConfig& config);
[[nodiscard]] JsiResult run_jsi(const RunConfig& config);
/// Schmidt analysis of an arbitrary JSI (frequency basis).
[[nodiscard]] SchmidtSpectrum run_schmidt(const Jsi& jsi);
[[nodiscard]] ChshRun run_chsh(const RunConfig& config);

struct ReproReport {
    std::string cavity_label;
    double fsr_ghz = 0.0;
    double linewidth_ghz = 0.0;
    double finesse = 0.0;
    double round_trip_ps = 0.0;
    int n_max = 0;

    Measured revival_count;
    Measured revival_spacing_ps;
    Measured central_dip_width_ps;
    std::vector<VisibilityRow> visibility_table;

    int time_bin_n_max = 0;
    Measured k_time_theory;
    Measured k_time_fitted;
    double fitted_decay_per_bin = 0.0;

    Measured k_freq_ideal;
    Measured k_freq_degraded;
    std::optional<Measured> crosstalk_db;  // empty for a leak-free, floor-free scan

    Measured n_time_bins;
    Measured n_freq_bins;
    Measured product_nt_nomega;
    Measured product_kt_komega;
    Measured time_dimensionality;
    Measured total_dimensionality;

    Measured s_fringe;          // 2√2·V at the configured visibility
    Measured s_fringe_fitted;   // 2√2·mean fitted fringe visibility
    Measured s_analytic;
    Measured s_counts;
    Measured s_counts_sigma;
    std::optional<Measured> violation_sigmas;

    std::vector<std::string> warnings;

    std::string config_hash;
    std::string tool_version;
    int schema_version = 0;
    std::uint64_t seed = 0;

    bool operator==(const ReproReport&) const = default;
};

[[nodiscard]] std::string report_to_json(const ReproReport& report);
/// Throws ValidationError on malformed input.
[[nodiscard]] ReproReport report_from_json(const std::string& text);
[[nodiscard]] std::string report_summary(const ReproReport& report);

/// Runs every stage and writes artifacts into config.output_dir. A stage
/// failure rethrows with the stage name; files already written are kept.
[[nodiscard]] ReproReport run_report(const RunConfig& config);

/// Exclusive advisory lock on <dir>/.bfc.lock, released on destruction.
/// Creates the directory. Throws RuntimeError("output", ...) if it is held elsewhere.
class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    int fd_ = -1;
};

void write_hom_artifacts(const HomResult& hom, const std::filesystem::path& dir);
void write_jsi_artifacts(const JsiResult& jsi, const std::filesystem::path& dir);
void write_chsh_artifacts(const ChshRun& chsh, const std::filesystem::path& dir);

}  // namespace bfc
