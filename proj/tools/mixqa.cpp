#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "mixqa/analysis.hpp"
#include "mixqa/audio_io.hpp"
#include "mixqa/csv.hpp"
#include "mixqa/report.hpp"
#include "mixqa/stats.hpp"
#include "mixqa/svg.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUsage = 3;

struct AnalyzeOptions {
    std::string file;
    std::string kind;
    std::string genre = "default";
    std::string format = "json";
    std::string profiles_path;
    std::string out_path;
};

struct BatchOptions {
    std::string path;
    std::string kind;
    std::string genre = "default";
    std::string format = "json";
    std::string profiles_path;
    std::string out_dir;
    unsigned jobs = 0;  // 0 = hardware concurrency
};

struct StatsOptions {
    std::string dataset;
    std::string analysis;
    std::string mapping_path;
    std::string kind;
    std::string field_a;
    std::string field_b;
    std::string field = "integrated_lufs";
    std::string direction = "above";
    double threshold = 0.0;
    double bin_width = 1.0;
    bool by_kind = false;
    bool by_genre = false;
    std::string format = "csv";  // freq: csv table or svg grouped bars
    std::string out_path;
};

struct ThresholdOverrides {
    double loud_mix = -17.5, loud_master = -14.0;
    double quiet_mix = -23.0, quiet_master = -24.0;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

void emit(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw mixqa::Error("cannot write output file: " + out_path);
    out << payload;
}

mixqa::AnalysisConfig make_config(const std::string& profiles_path,
                                  const ThresholdOverrides& t) {
    mixqa::AnalysisConfig config;
    std::string path = profiles_path;
    if (path.empty()) {
        if (const char* env = std::getenv("MIXQA_PROFILES")) path = env;
    }
    if (!path.empty()) config.profiles = mixqa::load_genre_profiles(path);
    config.issues.mix_too_loud_lufs = t.loud_mix;
    config.issues.master_too_loud_lufs = t.loud_master;
    config.issues.mix_too_quiet_lufs = t.quiet_mix;
    config.issues.master_too_quiet_lufs = t.quiet_master;
    config.issues.validate();
    return config;
}

ordered_json ranking_json(const std::vector<std::pair<mixqa::IssueKind, double>>& ranking) {
    ordered_json arr = ordered_json::array();
    for (const auto& [issue, prevalence] : ranking)
        arr.push_back({{"issue", std::string(mixqa::issue_name(issue))},
                       {"prevalence", std::round(prevalence * 1e6) / 1e6}});
    return arr;
}

int run_analyze(const AnalyzeOptions& opt, const ThresholdOverrides& overrides) {
    const auto kind = mixqa::parse_track_kind(opt.kind);
    if (!kind) {
        std::cerr << "error: --kind must be 'mix' or 'master', got '" << opt.kind << "'\n";
        return kExitUsage;
    }
    mixqa::AnalysisConfig config;
    try {
        config = make_config(opt.profiles_path, overrides);
    } catch (const mixqa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        auto [buffer, meta] = mixqa::decode_audio(opt.file);
        mixqa::AnalysisReport report =
            mixqa::analyze_track(buffer, meta, *kind, opt.genre, config);
        report.track_id = opt.file;
        emit(mixqa::render_report(report, opt.format == "text" ? mixqa::ReportFormat::text
                                                               : mixqa::ReportFormat::json),
             opt.out_path);
        return kExitOk;
    } catch (const mixqa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

struct BatchEntry {
    std::string path;
    mixqa::TrackKind kind = mixqa::TrackKind::mix;
    std::string genre;
};

std::vector<BatchEntry> collect_batch_entries(const BatchOptions& opt) {
    std::vector<BatchEntry> entries;
    const fs::path input(opt.path);

    if (fs::is_directory(input)) {
        const auto kind = mixqa::parse_track_kind(opt.kind);
        if (!kind)
            throw mixqa::Error("usage: directory batches need --kind mix|master");
        std::vector<std::string> paths;
        for (const auto& e : fs::directory_iterator(input)) {
            if (!e.is_regular_file()) continue;
            std::string ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (ext == ".wav") paths.push_back(e.path().string());
        }
        std::sort(paths.begin(), paths.end());
        for (auto& p : paths) entries.push_back({std::move(p), *kind, opt.genre});
        return entries;
    }

    // manifest CSV: path,kind,genre
    std::ifstream in(input, std::ios::binary);
    if (!in) throw mixqa::Error("cannot open batch input: " + opt.path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto records = mixqa::parse_csv_text(text);
    if (records.size() < 2) throw mixqa::Error("manifest has no rows: " + opt.path);

    int path_col = -1, kind_col = -1, genre_col = -1;
    for (std::size_t i = 0; i < records[0].size(); ++i) {
        std::string h = records[0][i];
        std::transform(h.begin(), h.end(), h.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (h == "path") path_col = static_cast<int>(i);
        if (h == "kind") kind_col = static_cast<int>(i);
        if (h == "genre") genre_col = static_cast<int>(i);
    }
    if (path_col < 0) throw mixqa::Error("manifest needs a 'path' column");

    const fs::path base = input.parent_path();
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto get = [&](int col) -> std::string {
            return col >= 0 && static_cast<std::size_t>(col) < rec.size()
                       ? rec[static_cast<std::size_t>(col)]
                       : std::string();
        };
        BatchEntry entry;
        fs::path p(get(path_col));
        entry.path = (p.is_absolute() ? p : base / p).string();
        const std::string row_kind = get(kind_col);
        const auto kind = mixqa::parse_track_kind(row_kind.empty() ? opt.kind : row_kind);
        if (!kind)
            throw mixqa::Error("manifest row " + std::to_string(r) +
                               ": no usable kind (row value '" + row_kind +
                               "', --kind '" + opt.kind + "')");
        entry.kind = *kind;
        const std::string row_genre = get(genre_col);
        entry.genre = row_genre.empty() ? opt.genre : row_genre;  // row overrides flag
        entries.push_back(std::move(entry));
    }
    return entries;
}

int run_batch(const BatchOptions& opt, const ThresholdOverrides& overrides) {
    mixqa::AnalysisConfig config;
    std::vector<BatchEntry> entries;
    try {
        config = make_config(opt.profiles_path, overrides);
        entries = collect_batch_entries(opt);
    } catch (const mixqa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return std::string(e.what()).starts_with("usage:") ? kExitUsage : kExitInput;
    }
    if (entries.empty()) {
        std::cerr << "error: no analyzable files under " << opt.path << "\n";
        return kExitInput;
    }

    std::vector<std::optional<mixqa::AnalysisReport>> results(entries.size());
    std::vector<std::string> failures(entries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= entries.size()) break;
            try {
                auto [buffer, meta] = mixqa::decode_audio(entries[i].path);
                auto report =
                    mixqa::analyze_track(buffer, meta, entries[i].kind, entries[i].genre, config);
                report.track_id = entries[i].path;
                results[i] = std::move(report);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    unsigned jobs = opt.jobs > 0 ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(entries.size()));
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::vector<mixqa::AnalysisReport> ok;
    for (auto& r : results)
        if (r) ok.push_back(*r);
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (!failures[i].empty())
            std::cerr << "failed: " << entries[i].path << ": " << failures[i] << "\n";
    if (ok.empty()) {
        std::cerr << "error: no file could be analyzed\n";
        return kExitInput;
    }

    const auto ranking = mixqa::rank_issues(ok);

    if (!opt.out_dir.empty()) {
        fs::create_directories(opt.out_dir);
        for (const auto& r : ok) {
            const fs::path dest = fs::path(opt.out_dir) /
                                  (fs::path(r.track_id).stem().string() + ".json");
            std::ofstream f(dest, std::ios::binary | std::ios::trunc);
            if (!f) {
                std::cerr << "error: cannot write " << dest.string() << "\n";
                return kExitInput;
            }
            f << mixqa::render_report(r, mixqa::ReportFormat::json);
        }
    }

    if (opt.format == "text") {
        std::string out;
        for (const auto& r : ok) out += mixqa::render_report(r, mixqa::ReportFormat::text) + "\n";
        out += "Issue ranking (" + std::to_string(ok.size()) + " tracks):\n";
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            char line[128];
            std::snprintf(line, sizeof line, "  %zu. %-28s %6.2f%%\n", i + 1,
                          std::string(mixqa::issue_name(ranking[i].first)).c_str(),
                          ranking[i].second * 100.0);
            out += line;
        }
        std::cout << out;
        return kExitOk;
    }

    ordered_json doc;
    doc["schema_version"] = mixqa::kReportSchemaVersion;
    doc["tracks"] = ordered_json::array();
    for (const auto& r : ok)
        doc["tracks"].push_back(ordered_json::parse(mixqa::render_report(r, mixqa::ReportFormat::json)));
    doc["failures"] = ordered_json::array();
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (!failures[i].empty())
            doc["failures"].push_back({{"path", entries[i].path}, {"error", failures[i]}});
    doc["ranking"] = ranking_json(ranking);
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

std::optional<mixqa::TrackKind> parse_kind_filter(const std::string& text, bool& bad) {
    bad = false;
    if (text.empty()) return std::nullopt;
    const auto kind = mixqa::parse_track_kind(text);
    if (!kind) bad = true;
    return kind;
}

int run_stats(const StatsOptions& opt) {
    static const std::set<std::string> known = {"freq",       "crosstab",  "chi2", "cramers_v",
                                                "exceedance", "histogram", "rank"};
    if (!known.count(opt.analysis)) {
        std::cerr << "error: unknown analysis '" << opt.analysis << "' (expected one of";
        for (const auto& k : known) std::cerr << " " << k;
        std::cerr << ")\n";
        return kExitUsage;
    }
    bool bad_kind = false;
    const auto kind = parse_kind_filter(opt.kind, bad_kind);
    if (bad_kind) {
        std::cerr << "error: --kind must be 'mix' or 'master', got '" << opt.kind << "'\n";
        return kExitUsage;
    }

    mixqa::DatasetTable table;
    try {
        mixqa::ColumnMapping mapping;
        if (!opt.mapping_path.empty()) mapping = mixqa::load_column_mapping(opt.mapping_path);
        table = mixqa::load_dataset(opt.dataset, mapping);
    } catch (const mixqa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cerr << "dataset: raw=" << table.raw_row_count
              << " kept=" << static_cast<std::int64_t>(table.rows.size())
              << " dropped=" << table.dropped_row_count << "\n";

    try {
        if (opt.analysis == "freq") {
            const auto groups =
                mixqa::frequency_distribution(table, opt.field, opt.by_kind, opt.by_genre);
            std::int64_t used = 0;
            for (const auto& g : groups) used += g.total;
            std::cerr << "freq: field=" << opt.field << " used=" << used << " excluded="
                      << static_cast<std::int64_t>(table.rows.size()) - used << "\n";
            if (opt.format == "svg") {
                // grouped bars: one bar group per category, one series per group
                std::vector<std::string> categories;
                for (const auto& g : groups)
                    for (const auto& [label, count] : g.counts)
                        if (std::find(categories.begin(), categories.end(), label) ==
                            categories.end())
                            categories.push_back(label);
                std::vector<mixqa::SvgSeries> series;
                for (const auto& g : groups) {
                    mixqa::SvgSeries s{g.group, {}};
                    for (const auto& c : categories) s.values.push_back(100.0 * g.proportion(c));
                    series.push_back(std::move(s));
                }
                emit(mixqa::render_grouped_bars_svg(categories, series,
                                                    opt.field + " distribution", opt.field,
                                                    "% of tracks"),
                     opt.out_path);
            } else {
                std::string csv = "group,field,category,count,proportion\n";
                for (const auto& g : groups) {
                    for (const auto& [label, count] : g.counts) {
                        char tail[64];
                        std::snprintf(tail, sizeof tail, ",%lld,%.6f\n",
                                      static_cast<long long>(count), g.proportion(label));
                        csv += csv_field(g.group) + "," + csv_field(opt.field) + "," +
                               csv_field(label) + tail;
                    }
                }
                emit(csv, opt.out_path);
            }
        } else if (opt.analysis == "crosstab") {
            const auto t = mixqa::crosstab(table, opt.field_a, opt.field_b, kind);
            std::string csv = csv_field(opt.field_a + "\\" + opt.field_b);
            for (const auto& c : t.col_labels) csv += "," + csv_field(c);
            csv += "\n";
            for (std::size_t i = 0; i < t.row_labels.size(); ++i) {
                csv += csv_field(t.row_labels[i]);
                for (std::size_t j = 0; j < t.col_labels.size(); ++j)
                    csv += "," + std::to_string(static_cast<long long>(
                                     t.counts(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(j))));
                csv += "\n";
            }
            std::cerr << "crosstab: n=" << static_cast<std::int64_t>(t.n()) << "\n";
            emit(csv, opt.out_path);
        } else if (opt.analysis == "chi2" || opt.analysis == "cramers_v") {
            const auto t = mixqa::crosstab(table, opt.field_a, opt.field_b, kind);
            const auto r = mixqa::chi_square_test(t);
            ordered_json j;
            j["analysis"] = opt.analysis;
            j["field_a"] = opt.field_a;
            j["field_b"] = opt.field_b;
            j["kind"] = kind ? std::string(mixqa::track_kind_name(*kind)) : "all";
            j["n"] = static_cast<std::int64_t>(t.n());
            if (opt.analysis == "cramers_v")
                j["cramers_v"] = std::round(mixqa::cramers_v(t) * 1e6) / 1e6;
            j["statistic"] = std::round(r.statistic * 1e6) / 1e6;
            j["dof"] = r.dof;
            j["p_value"] = r.p_value;
            if (opt.analysis == "chi2") {
                ordered_json residuals = ordered_json::array();
                for (Eigen::Index i = 0; i < r.std_residuals.rows(); ++i) {
                    ordered_json row = ordered_json::array();
                    for (Eigen::Index jj = 0; jj < r.std_residuals.cols(); ++jj)
                        row.push_back(std::round(r.std_residuals(i, jj) * 1e4) / 1e4);
                    residuals.push_back(row);
                }
                j["std_residuals"] = residuals;
            }
            std::cerr << opt.analysis << ": n=" << static_cast<std::int64_t>(t.n()) << "\n";
            emit(j.dump(2) + "\n", opt.out_path);
        } else if (opt.analysis == "exceedance") {
            const auto dir = mixqa::parse_direction(opt.direction);
            if (!dir) {
                std::cerr << "error: bad --direction '" << opt.direction << "'\n";
                return kExitUsage;
            }
            const auto r = mixqa::threshold_exceedance(table, opt.field, opt.threshold, *dir, kind);
            ordered_json j;
            j["analysis"] = "exceedance";
            j["field"] = opt.field;
            j["threshold"] = opt.threshold;
            j["direction"] = opt.direction;
            j["kind"] = kind ? std::string(mixqa::track_kind_name(*kind)) : "all";
            j["percentage"] = std::round(r.percentage * 1e4) / 1e4;
            j["count"] = r.count;
            j["denominator"] = r.denominator;
            std::cerr << "exceedance: used=" << r.denominator << "\n";
            emit(j.dump(2) + "\n", opt.out_path);
        } else if (opt.analysis == "histogram") {
            const auto field = opt.field == "true_peak_dbtp" ? mixqa::LoudnessField::true_peak_dbtp
                                                             : mixqa::LoudnessField::integrated_lufs;
            if (opt.field != "integrated_lufs" && opt.field != "true_peak_dbtp")
                throw mixqa::UnknownField("histogram needs --field integrated_lufs|true_peak_dbtp");
            std::vector<mixqa::SvgSeries> series;
            std::vector<double> edges;
            std::int64_t in_range = 0, out_of_range = 0;
            if (kind) {
                const auto h = mixqa::loudness_histogram(table, kind, field, opt.bin_width);
                edges = h.edges;
                series.push_back({std::string(mixqa::track_kind_name(*kind)), h.densities});
                in_range = h.in_range;
                out_of_range = h.out_of_range;
            } else {
                for (const auto k : {mixqa::TrackKind::mix, mixqa::TrackKind::master}) {
                    const auto h = mixqa::loudness_histogram(table, k, field, opt.bin_width);
                    edges = h.edges;
                    series.push_back({std::string(mixqa::track_kind_name(k)), h.densities});
                    in_range += h.in_range;
                    out_of_range += h.out_of_range;
                }
            }
            const std::string unit =
                field == mixqa::LoudnessField::integrated_lufs ? "LUFS" : "dBTP";
            std::cerr << "histogram: in_range=" << in_range << " out_of_range=" << out_of_range
                      << "\n";
            emit(mixqa::render_histogram_svg(edges, series, opt.field + " distribution",
                                             opt.field + " (" + unit + ")", "density"),
                 opt.out_path);
        } else if (opt.analysis == "rank") {
            std::vector<std::set<mixqa::IssueKind>> sets;
            for (const auto& row : table.rows) {
                if (kind && row.kind != *kind) continue;
                sets.push_back(mixqa::issues_from_row(row));
            }
            const auto ranking = mixqa::rank_issues(sets);
            ordered_json j;
            j["analysis"] = "rank";
            j["kind"] = kind ? std::string(mixqa::track_kind_name(*kind)) : "all";
            j["rows"] = static_cast<std::int64_t>(sets.size());
            j["ranking"] = ranking_json(ranking);
            std::cerr << "rank: used=" << sets.size() << "\n";
            emit(j.dump(2) + "\n", opt.out_path);
        }
        return kExitOk;
    } catch (const mixqa::UnknownField& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const mixqa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audio mix/master quality analyzer and metrics-dataset statistics"};
    app.require_subcommand(1);

    AnalyzeOptions analyze_opt;
    BatchOptions batch_opt;
    StatsOptions stats_opt;
    ThresholdOverrides overrides;

    auto add_threshold_flags = [&](CLI::App* cmd) {
        cmd->add_option("--loud-mix", overrides.loud_mix, "too-loud threshold for mixes (LUFS)");
        cmd->add_option("--loud-master", overrides.loud_master,
                        "too-loud threshold for masters (LUFS)");
        cmd->add_option("--quiet-mix", overrides.quiet_mix, "too-quiet threshold for mixes (LUFS)");
        cmd->add_option("--quiet-master", overrides.quiet_master,
                        "too-quiet threshold for masters (LUFS)");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "Analyze one audio file");
    analyze->add_option("file", analyze_opt.file, "WAV file to analyze")->required();
    analyze->add_option("--kind", analyze_opt.kind, "mix or master")->required();
    analyze->add_option("--genre", analyze_opt.genre, "genre id for profile lookup");
    analyze->add_option("--format", analyze_opt.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--profiles", analyze_opt.profiles_path,
                        "genre profile config (default: $MIXQA_PROFILES)");
    analyze->add_option("--out", analyze_opt.out_path, "write report here instead of stdout");
    add_threshold_flags(analyze);

    CLI::App* batch = app.add_subcommand("batch", "Analyze a directory or manifest CSV");
    batch->add_option("path", batch_opt.path, "directory of .wav files or manifest CSV")
        ->required();
    batch->add_option("--kind", batch_opt.kind, "mix or master (manifest rows may override)");
    batch->add_option("--genre", batch_opt.genre, "genre id (manifest rows may override)");
    batch->add_option("--format", batch_opt.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    batch->add_option("--profiles", batch_opt.profiles_path, "genre profile config");
    batch->add_option("--out-dir", batch_opt.out_dir, "also write one JSON report per track here");
    batch->add_option("--jobs", batch_opt.jobs, "parallel workers (default: cores)");
    add_threshold_flags(batch);

    CLI::App* stats = app.add_subcommand("stats", "Dataset statistics over a metrics CSV");
    stats->add_option("dataset", stats_opt.dataset, "metrics CSV file")->required();
    stats->add_option("--analysis", stats_opt.analysis,
                      "freq|crosstab|chi2|cramers_v|exceedance|histogram|rank")
        ->required();
    stats->add_option("--mapping", stats_opt.mapping_path, "column mapping config");
    stats->add_option("--kind", stats_opt.kind, "filter rows: mix or master");
    stats->add_option("--a", stats_opt.field_a, "first categorical field");
    stats->add_option("--b", stats_opt.field_b, "second categorical field");
    stats->add_option("--field", stats_opt.field, "numeric or categorical field");
    stats->add_option("--threshold", stats_opt.threshold, "exceedance threshold");
    stats->add_option("--direction", stats_opt.direction,
                      "above|below|above_or_equal|below_or_equal");
    stats->add_option("--bin-width", stats_opt.bin_width, "histogram bin width");
    stats->add_flag("--by-kind", stats_opt.by_kind, "group frequencies by track kind");
    stats->add_flag("--by-genre", stats_opt.by_genre, "group frequencies by genre");
    stats->add_option("--format", stats_opt.format, "freq output: csv or svg grouped bars")
        ->check(CLI::IsMember({"csv", "svg"}));
    stats->add_option("--out", stats_opt.out_path, "write artifact here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (analyze->parsed()) return run_analyze(analyze_opt, overrides);
        if (batch->parsed()) return run_batch(batch_opt, overrides);
        if (stats->parsed()) return run_stats(stats_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}
