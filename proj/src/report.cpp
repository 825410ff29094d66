#include "mixqa/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixqa {

namespace {

using ordered_json = nlohmann::ordered_json;

// Fixed rendering precision: 0.1 for dB/LUFS metrics, 0.001 for ratios.
double round1(double x) { return std::round(x * 10.0) / 10.0; }
double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

ordered_json db_or_null(std::optional<double> v) {
    if (!v.has_value() || !std::isfinite(*v)) return nullptr;
    return round1(*v);
}

std::string_view issue_advice(IssueKind kind) {
    switch (kind) {
        case IssueKind::too_loud:
            return "Reduce the overall level; the track exceeds the loudness target for its kind.";
        case IssueKind::too_quiet:
            return "Raise the overall level; the track sits below the quiet threshold for its kind.";
        case IssueKind::clipping:
            return "Lower the output gain or engage a true-peak limiter to remove clipped samples.";
        case IssueKind::overcompression:
            return "Ease off dynamic range compression to restore transient contrast.";
        case IssueKind::undercompression:
            return "Apply more compression to bring the dynamic range into the genre band.";
        case IssueKind::stereo_field_issues:
            return "Revisit stereo placement and width; the stereo field falls outside the preferred range.";
        case IssueKind::phase_issues:
            return "Check channel alignment and polarity; large left/right phase differences cause comb filtering.";
        case IssueKind::lack_of_mono_compatibility:
            return "Check for anti-phase content; the track loses energy when folded down to mono.";
    }
    return "";
}

std::string format_db(double v, const char* unit) {
    if (!std::isfinite(v)) return v < 0 ? std::string("-inf ") + unit : std::string("+inf ") + unit;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f %s", v, unit);
    return buf;
}

std::string format3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

} // namespace

std::string_view issue_name(IssueKind kind) {
    switch (kind) {
        case IssueKind::too_loud: return "too_loud";
        case IssueKind::too_quiet: return "too_quiet";
        case IssueKind::clipping: return "clipping";
        case IssueKind::overcompression: return "overcompression";
        case IssueKind::undercompression: return "undercompression";
        case IssueKind::stereo_field_issues: return "stereo_field_issues";
        case IssueKind::phase_issues: return "phase_issues";
        case IssueKind::lack_of_mono_compatibility: return "lack_of_mono_compatibility";
    }
    return "";
}

void IssueThresholds::validate() const {
    if (!(master_too_loud_lufs > master_too_quiet_lufs) ||
        !(mix_too_loud_lufs > mix_too_quiet_lufs))
        throw ConfigError("loud threshold must lie above the quiet threshold");
}

std::set<IssueKind> classify_issues(const AnalysisReport& report,
                                    const IssueThresholds& thresholds) {
    thresholds.validate();
    std::set<IssueKind> issues;
    const bool master = report.kind == TrackKind::master;
    const double loud = master ? thresholds.master_too_loud_lufs : thresholds.mix_too_loud_lufs;
    const double quiet = master ? thresholds.master_too_quiet_lufs : thresholds.mix_too_quiet_lufs;

    if (report.loudness) {
        if (report.loudness->integrated_lufs) {
            const double lufs = *report.loudness->integrated_lufs;
            if (lufs > loud) issues.insert(IssueKind::too_loud);
            if (lufs < quiet) issues.insert(IssueKind::too_quiet);
        } else {
            issues.insert(IssueKind::too_quiet);  // fully gated measurement
        }
    }

    if (report.clipping && report.clipping->severity != ClippingSeverity::none)
        issues.insert(IssueKind::clipping);

    if (report.compression) {
        if (report.compression->verdict == CompressionVerdict::overcompressed)
            issues.insert(IssueKind::overcompression);
        else if (report.compression->verdict == CompressionVerdict::undercompressed)
            issues.insert(IssueKind::undercompression);
    }

    if (report.stereo) {
        const auto& categories = master ? thresholds.master_stereo_issue_categories
                                        : thresholds.mix_stereo_issue_categories;
        bool flagged = categories.count(report.stereo->category) > 0;
        if (!flagged && !master && thresholds.mix_wide_with_phase_issue &&
            report.stereo->category == StereoCategory::wide && report.phase &&
            report.phase->has_issue)
            flagged = true;
        if (flagged) issues.insert(IssueKind::stereo_field_issues);
    }

    if (report.phase && report.phase->has_issue) issues.insert(IssueKind::phase_issues);
    if (report.mono_compat && !report.mono_compat->compatible)
        issues.insert(IssueKind::lack_of_mono_compatibility);

    return issues;
}

std::vector<std::pair<IssueKind, double>>
rank_issues(const std::vector<std::set<IssueKind>>& issue_sets) {
    if (issue_sets.empty()) throw EmptyCorpus("cannot rank issues over an empty corpus");

    std::vector<std::pair<IssueKind, double>> ranking;
    ranking.reserve(kAllIssues.size());
    for (IssueKind kind : kAllIssues) {
        const auto hits = std::count_if(issue_sets.begin(), issue_sets.end(),
                                        [&](const auto& s) { return s.count(kind) > 0; });
        ranking.emplace_back(kind, static_cast<double>(hits) /
                                       static_cast<double>(issue_sets.size()));
    }
    std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return issue_name(a.first) < issue_name(b.first);
    });
    return ranking;
}

std::vector<std::pair<IssueKind, double>>
rank_issues(const std::vector<AnalysisReport>& reports, std::optional<TrackKind> kind_filter) {
    std::vector<std::set<IssueKind>> sets;
    sets.reserve(reports.size());
    for (const auto& r : reports)
        if (!kind_filter || r.kind == *kind_filter) sets.push_back(r.issues);
    return rank_issues(sets);
}

std::string render_report(const AnalysisReport& report, ReportFormat format) {
    if (format == ReportFormat::json) {
        ordered_json j;
        j["schema_version"] = kReportSchemaVersion;
        j["track_id"] = report.track_id;
        j["kind"] = std::string(track_kind_name(report.kind));
        j["genre"] = report.genre;
        j["file"] = {
            {"sample_rate", report.file_meta.sample_rate},
            {"bit_depth", report.file_meta.bit_depth},
            {"channels", report.file_meta.channel_count},
            {"duration_seconds", round3(report.file_meta.duration_seconds)},
            {"encoding",
             report.file_meta.encoding == Encoding::pcm_float ? "pcm_float" : "pcm_int"},
        };
        if (report.loudness) {
            j["loudness"] = {
                {"integrated_lufs", db_or_null(report.loudness->integrated_lufs)},
                {"true_peak_dbtp", db_or_null(report.loudness->true_peak_dbtp)},
            };
        } else {
            j["loudness"] = nullptr;
        }
        if (report.clipping) {
            j["clipping"] = {
                {"clipped_sample_count", report.clipping->clipped_sample_count},
                {"severity", std::string(clipping_severity_name(report.clipping->severity))},
            };
        } else {
            j["clipping"] = nullptr;
        }
        if (report.compression) {
            j["compression"] = {
                {"dynamic_range_db", round1(report.compression->dynamic_range_db)},
                {"verdict", std::string(compression_verdict_name(report.compression->verdict))},
                {"genre_used", report.compression->genre_used},
            };
        } else {
            j["compression"] = nullptr;
        }
        if (report.stereo) {
            j["stereo"] = {
                {"ild_db", db_or_null(report.stereo->ild_db)},
                {"side_mid_energy_ratio_db", db_or_null(report.stereo->side_mid_energy_ratio_db)},
                {"category", std::string(stereo_category_name(report.stereo->category))},
            };
        } else {
            j["stereo"] = nullptr;
        }
        if (report.mono_compat) {
            j["mono_compatibility"] = {
                {"mid_side_correlation", round3(report.mono_compat->mid_side_correlation)},
                {"folddown_loss_db", db_or_null(report.mono_compat->folddown_loss_db)},
                {"compatible", report.mono_compat->compatible},
            };
        } else {
            j["mono_compatibility"] = nullptr;
        }
        if (report.phase) {
            j["phase"] = {
                {"mean_abs_phase_diff_rad", round3(report.phase->mean_abs_phase_diff_rad)},
                {"has_issue", report.phase->has_issue},
            };
        } else {
            j["phase"] = nullptr;
        }
        if (report.tonal) {
            ordered_json bands = ordered_json::array();
            for (int i = 0; i < 4; ++i) {
                bands.push_back({
                    {"range_hz", {kTonalBands[i].first, kTonalBands[i].second}},
                    {"energy_fraction", round3(report.tonal->band_energy_fraction(i))},
                    {"class", std::string(band_class_name(report.tonal->band_class[i]))},
                });
            }
            j["tonal"] = bands;
        } else {
            j["tonal"] = nullptr;
        }
        j["skipped"] = report.skipped;
        ordered_json issues = ordered_json::array();
        for (IssueKind kind : kAllIssues)
            if (report.issues.count(kind)) issues.push_back(std::string(issue_name(kind)));
        j["issues"] = issues;
        return j.dump(2) + "\n";
    }

    // text
    std::ostringstream out;
    out << "Track: " << (report.track_id.empty() ? "(unnamed)" : report.track_id) << " ["
        << track_kind_name(report.kind) << ", genre " << report.genre << "]\n";
    out << "  File: " << report.file_meta.sample_rate << " Hz, " << report.file_meta.bit_depth
        << "-bit "
        << (report.file_meta.encoding == Encoding::pcm_float ? "float" : "integer") << ", "
        << report.file_meta.channel_count << " channel(s), "
        << format3(report.file_meta.duration_seconds) << " s\n";
    if (report.loudness) {
        out << "  Integrated loudness: ";
        if (report.loudness->integrated_lufs)
            out << format_db(*report.loudness->integrated_lufs, "LUFS");
        else
            out << "undefined (all blocks gated)";
        out << " | True peak: " << format_db(report.loudness->true_peak_dbtp, "dBTP") << "\n";
    }
    if (report.clipping)
        out << "  Clipping: " << clipping_severity_name(report.clipping->severity) << " ("
            << report.clipping->clipped_sample_count << " samples)\n";
    if (report.compression)
        out << "  Dynamic range: " << format_db(report.compression->dynamic_range_db, "dB") << " ("
            << compression_verdict_name(report.compression->verdict) << ", profile '"
            << report.compression->genre_used << "')\n";
    if (report.stereo)
        out << "  Stereo width: " << stereo_category_name(report.stereo->category) << " (side/mid "
            << format_db(report.stereo->side_mid_energy_ratio_db, "dB") << ", ILD "
            << format_db(report.stereo->ild_db, "dB") << ")\n";
    if (report.mono_compat)
        out << "  Mono compatibility: " << (report.mono_compat->compatible ? "ok" : "poor")
            << " (fold-down " << format_db(report.mono_compat->folddown_loss_db, "dB")
            << ", mid/side correlation " << format3(report.mono_compat->mid_side_correlation)
            << ")\n";
    if (report.phase)
        out << "  Phase: mean |dphi| " << format3(report.phase->mean_abs_phase_diff_rad)
            << " rad (" << (report.phase->has_issue ? "issue" : "ok") << ")\n";
    if (report.tonal) {
        out << "  Tonal balance:";
        static const char* names[4] = {"low", "low-mid", "high-mid", "high"};
        for (int i = 0; i < 4; ++i)
            out << (i ? "," : "") << " " << names[i] << " "
                << format3(report.tonal->band_energy_fraction(i)) << " ("
                << band_class_name(report.tonal->band_class[i]) << ")";
        out << "\n";
    }
    for (const auto& [what, why] : report.skipped)
        out << "  Skipped " << what << ": " << why << "\n";

    if (report.issues.empty()) {
        out << "No issues detected\n";
    } else {
        out << "Issues:\n";
        for (IssueKind kind : kAllIssues)
            if (report.issues.count(kind))
                out << "  - " << issue_name(kind) << ": " << issue_advice(kind) << "\n";
    }
    return out.str();
}

} // namespace mixqa
