#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mixqa/analysis_results.hpp"
#include "mixqa/audio_io.hpp"

namespace mixqa {

// The eight issue categories tracked per report.
enum class IssueKind {
    too_loud,
    too_quiet,
    clipping,
    overcompression,
    undercompression,
    stereo_field_issues,
    phase_issues,
    lack_of_mono_compatibility,
};

inline constexpr std::array<IssueKind, 8> kAllIssues = {
    IssueKind::too_loud,
    IssueKind::too_quiet,
    IssueKind::clipping,
    IssueKind::overcompression,
    IssueKind::undercompression,
    IssueKind::stereo_field_issues,
    IssueKind::phase_issues,
    IssueKind::lack_of_mono_compatibility,
};

std::string_view issue_name(IssueKind kind);

/// Loudness policy and stereo-issue membership. Encodes platform policy,
/// not physics, so everything is overridable.
struct IssueThresholds {
    double master_too_loud_lufs = -14.0;  // streaming-platform normalization target
    double mix_too_loud_lufs = -17.5;     // headroom guard before mastering
    double master_too_quiet_lufs = -24.0;
    double mix_too_quiet_lufs = -23.0;
    std::set<StereoCategory> mix_stereo_issue_categories = {StereoCategory::mono,
                                                            StereoCategory::narrow};
    std::set<StereoCategory> master_stereo_issue_categories = {StereoCategory::mono,
                                                               StereoCategory::narrow};
    // Optional mix rule: a wide field combined with a phase issue also counts.
    bool mix_wide_with_phase_issue = false;

    void validate() const;  // loud threshold must stay above quiet threshold
};

/// Per-track bundle of every metric plus the derived issue flags.
/// Analyzers that were skipped (mono input) or failed record a reason in
/// `skipped` and leave their field empty.
struct AnalysisReport {
    std::string track_id;
    TrackKind kind = TrackKind::mix;
    std::string genre;
    FileMeta file_meta;
    std::optional<LoudnessResult> loudness;
    std::optional<ClippingReport> clipping;
    std::optional<CompressionResult> compression;
    std::optional<StereoResult> stereo;
    std::optional<MonoCompatResult> mono_compat;
    std::optional<PhaseResult> phase;
    std::optional<TonalProfile> tonal;
    std::map<std::string, std::string> skipped;  // analyzer -> reason
    std::set<IssueKind> issues;
};

/// Derive the issue set from the report's analyzer fields. Recomputing on an
/// already-classified report yields the same set.
std::set<IssueKind> classify_issues(const AnalysisReport& report,
                                    const IssueThresholds& thresholds = {});

/// Prevalence ranking over a corpus: fraction of issue sets containing each
/// of the eight kinds, sorted descending, ties broken alphabetically by
/// issue name. Throws EmptyCorpus on empty input.
std::vector<std::pair<IssueKind, double>>
rank_issues(const std::vector<std::set<IssueKind>>& issue_sets);

std::vector<std::pair<IssueKind, double>>
rank_issues(const std::vector<AnalysisReport>& reports,
            std::optional<TrackKind> kind_filter = std::nullopt);

enum class ReportFormat { json, text };

/// Render a report. JSON output has a stable field order, fixed numeric
/// precision (0.1 for dB/LUFS metrics, 0.001 for ratios) and a
/// schema_version field; undefined loudness renders as null. Text output is
/// a human-readable summary with one actionable sentence per issue.
std::string render_report(const AnalysisReport& report, ReportFormat format);

inline constexpr int kReportSchemaVersion = 1;

} // namespace mixqa
