#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "mixqa/errors.hpp"

namespace mixqa {

enum class TrackKind { mix, master };

std::string_view track_kind_name(TrackKind kind);
std::optional<TrackKind> parse_track_kind(std::string_view text);

// ---------------------------------------------------------------------------
// Analyzer result types
// ---------------------------------------------------------------------------

struct LoudnessResult {
    std::optional<double> integrated_lufs;  // empty when every block is gated
    double true_peak_dbtp = -std::numeric_limits<double>::infinity();
};

enum class ClippingSeverity { none, minor, major };

std::string_view clipping_severity_name(ClippingSeverity s);

struct ClippingReport {
    std::int64_t clipped_sample_count = 0;  // across all channels
    ClippingSeverity severity = ClippingSeverity::none;
};

enum class CompressionVerdict { undercompressed, optimal, overcompressed };

std::string_view compression_verdict_name(CompressionVerdict v);

struct CompressionResult {
    double dynamic_range_db = 0.0;
    CompressionVerdict verdict = CompressionVerdict::optimal;
    std::string genre_used;  // genre whose profile decided the verdict
};

enum class StereoCategory { mono, narrow, balanced, wide };

std::string_view stereo_category_name(StereoCategory c);

struct StereoResult {
    double ild_db = 0.0;                   // mean |inter-channel level difference|
    double side_mid_energy_ratio_db = 0.0; // 10*log10(E_side / E_mid)
    StereoCategory category = StereoCategory::mono;
};

struct MonoCompatResult {
    double mid_side_correlation = 0.0;  // Pearson, 0 if either side has zero variance
    double folddown_loss_db = 0.0;      // 10*log10(E_mid / mean(E_L, E_R))
    bool compatible = true;
};

struct PhaseResult {
    double mean_abs_phase_diff_rad = 0.0;  // in [0, pi]
    bool has_issue = false;
};

enum class BandClass { low, medium, high };

std::string_view band_class_name(BandClass b);

// Analysis bands in Hz: lows, low mids, high mids, highs.
inline constexpr std::array<std::pair<double, double>, 4> kTonalBands = {
    {{20.0, 250.0}, {250.0, 2000.0}, {2000.0, 8000.0}, {8000.0, 20000.0}}};

struct TonalProfile {
    Eigen::Array4d band_energy_fraction = Eigen::Array4d::Zero();
    std::array<BandClass, 4> band_class = {BandClass::low, BandClass::low,
                                           BandClass::low, BandClass::low};
};

// ---------------------------------------------------------------------------
// Genre profiles (operator-tunable targets, supplied via config file)
// ---------------------------------------------------------------------------

struct GenreProfile {
    std::string genre = "default";
    double dr_low_db = 8.0;    // dynamic-range band for optimal compression
    double dr_high_db = 14.0;
    Eigen::Array4d band_low_threshold{0.05, 0.15, 0.15, 0.05};
    Eigen::Array4d band_high_threshold{0.35, 0.55, 0.55, 0.35};

    void validate() const;  // throws ConfigError on a violated invariant
};

/// Per-genre profiles with a guaranteed "default" fallback.
class GenreProfileSet {
public:
    GenreProfileSet();  // "default" profile only, built-in values
    void insert(GenreProfile profile);
    const GenreProfile& lookup(const std::string& genre) const;
    const std::map<std::string, GenreProfile>& profiles() const { return profiles_; }

private:
    std::map<std::string, GenreProfile> profiles_;
};

/// Parse a genre-profile config file ([genre] sections with dr_low_db,
/// dr_high_db, band_low, band_high keys). Missing genres inherit "default".
GenreProfileSet load_genre_profiles(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Analyzer thresholds (config defaults per the analysis contracts)
// ---------------------------------------------------------------------------

struct StereoThresholds {
    double mono_ratio_db = -60.0;    // side/mid below this => mono
    double narrow_ratio_db = -18.0;  // below => narrow
    double wide_ratio_db = -6.0;     // above => wide
    double block_gate_dbfs = -60.0;  // RMS gate for ILD blocks
};

struct MonoCompatThresholds {
    double min_folddown_db = -6.0;
    double max_abs_correlation = 0.6;
};

struct PhaseThresholds {
    double issue_rad = 1.7;        // mean |phase difference| beyond this is an issue
    double bin_gate_dbfs = -60.0;  // both channels' bin amplitudes must exceed this
};

// Samples at or above 1 - 2^-15 count as clipped, so normalized integer-PCM
// positive full scale (32767/32768 for 16-bit) is included.
inline constexpr double kClipThreshold = 1.0 - 1.0 / 32768.0;

} // namespace mixqa
