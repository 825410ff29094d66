#include "mixqa/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mixqa/csv.hpp"

namespace mixqa {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string normalize(const std::string& s) { return lowercase(trim(s)); }

std::optional<double> parse_number(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        if (std::isnan(v)) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<bool> parse_bool(const std::string& raw) {
    const std::string s = normalize(raw);
    if (s == "true" || s == "1" || s == "yes" || s == "t" || s == "y") return true;
    if (s == "false" || s == "0" || s == "no" || s == "f" || s == "n") return false;
    return std::nullopt;
}

std::optional<ClippingSeverity> parse_clipping(const std::string& raw) {
    const std::string s = normalize(raw);
    if (s == "none" || s == "no clipping") return ClippingSeverity::none;
    if (s == "minor") return ClippingSeverity::minor;
    if (s == "major") return ClippingSeverity::major;
    return std::nullopt;
}

std::optional<CompressionVerdict> parse_compression(const std::string& raw) {
    const std::string s = normalize(raw);
    if (s == "under" || s == "undercompressed" || s == "under_compressed" ||
        s == "under-compressed" || s == "undercompression")
        return CompressionVerdict::undercompressed;
    if (s == "optimal" || s == "ok") return CompressionVerdict::optimal;
    if (s == "over" || s == "overcompressed" || s == "over_compressed" ||
        s == "over-compressed" || s == "overcompression")
        return CompressionVerdict::overcompressed;
    return std::nullopt;
}

std::optional<StereoCategory> parse_stereo(const std::string& raw) {
    const std::string s = normalize(raw);
    if (s == "mono") return StereoCategory::mono;
    if (s == "narrow") return StereoCategory::narrow;
    if (s == "balanced") return StereoCategory::balanced;
    if (s == "wide") return StereoCategory::wide;
    return std::nullopt;
}

std::optional<BandClass> parse_band_class(const std::string& raw) {
    const std::string s = normalize(raw);
    if (s == "low") return BandClass::low;
    if (s == "medium" || s == "mid" || s == "med") return BandClass::medium;
    if (s == "high") return BandClass::high;
    return std::nullopt;
}

int tonal_index(const std::string& field) {
    if (field == "tonal_bass") return 0;
    if (field == "tonal_low_mid") return 1;
    if (field == "tonal_high_mid") return 2;
    if (field == "tonal_high") return 3;
    return -1;
}

// Categorical value of a row's field as a display label, or empty when the
// row does not carry it.
std::optional<std::string> categorical_value(const DatasetRow& row, const std::string& field) {
    if (field == "track_kind") return std::string(track_kind_name(row.kind));
    if (field == "genre") return row.genre;
    if (field == "clipping") {
        if (!row.clipping) return std::nullopt;
        return std::string(clipping_severity_name(*row.clipping));
    }
    if (field == "mono_compatible") {
        if (!row.mono_compatible) return std::nullopt;
        return std::string(*row.mono_compatible ? "true" : "false");
    }
    if (field == "phase_issue") {
        if (!row.phase_issue) return std::nullopt;
        return std::string(*row.phase_issue ? "true" : "false");
    }
    if (field == "compression") {
        if (!row.compression) return std::nullopt;
        return std::string(compression_verdict_name(*row.compression));
    }
    if (field == "stereo_field") {
        if (!row.stereo_field) return std::nullopt;
        return std::string(stereo_category_name(*row.stereo_field));
    }
    const int t = tonal_index(field);
    if (t >= 0) {
        if (!row.tonal[t]) return std::nullopt;
        return std::string(band_class_name(*row.tonal[t]));
    }
    throw UnknownField("unknown or non-categorical field: " + field);
}

std::optional<double> numeric_value(const DatasetRow& row, const std::string& field) {
    if (field == "integrated_lufs") return row.integrated_lufs;
    if (field == "true_peak_dbtp") return row.true_peak_dbtp;
    throw UnknownField("unknown or non-numeric field: " + field);
}

std::string header_report(const std::vector<std::string>& headers) {
    std::string s = "available columns: ";
    for (std::size_t i = 0; i < headers.size(); ++i) {
        if (i) s += ", ";
        s += "'" + headers[i] + "'";
    }
    return s;
}

} // namespace

ColumnMapping load_column_mapping(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open column mapping: " + path.string());
    ColumnMapping mapping;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'canonical_field = Raw Header'");
        const std::string key = normalize(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (std::find(kDatasetFields.begin(), kDatasetFields.end(), key) == kDatasetFields.end()) {
            std::string fields;
            for (const auto& f : kDatasetFields) fields += (fields.empty() ? "" : ", ") + f;
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": '" + key +
                              "' is not a canonical field (expected one of: " + fields + ")");
        }
        mapping.bindings[key] = value;
    }
    return mapping;
}

DatasetTable load_dataset(const std::filesystem::path& path, const ColumnMapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EmptyFile("cannot open dataset: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);  // UTF-8 BOM
    const auto records = parse_csv_text(text);
    if (records.empty()) throw EmptyFile("dataset has no header row: " + path.string());
    if (records.size() == 1) throw EmptyFile("dataset has a header but no rows: " + path.string());

    const std::vector<std::string>& header = records.front();
    auto find_column = [&](const std::string& name) -> int {
        const std::string wanted = normalize(name);
        for (std::size_t i = 0; i < header.size(); ++i)
            if (normalize(header[i]) == wanted) return static_cast<int>(i);
        return -1;
    };

    // Resolve each canonical field to a column index. Explicit bindings must
    // exist; identity defaults bind only when present.
    std::map<std::string, int> columns;
    for (const auto& field : kDatasetFields) {
        const auto bound = mapping.bindings.find(field);
        const std::string target = bound != mapping.bindings.end() ? bound->second : field;
        const int idx = find_column(target);
        if (idx < 0 && bound != mapping.bindings.end())
            throw MissingColumn("mapped column '" + target + "' for field '" + field +
                                "' not found; " + header_report(header));
        if (idx >= 0) columns[field] = idx;
    }
    if (!columns.count("track_kind"))
        throw MissingColumn("no column for required field 'track_kind'; " +
                            header_report(header) +
                            " (write a mapping file binding track_kind to one of them)");

    auto cell = [&](const std::vector<std::string>& rec, const std::string& field)
        -> std::optional<std::string> {
        const auto it = columns.find(field);
        if (it == columns.end()) return std::nullopt;
        if (static_cast<std::size_t>(it->second) >= rec.size()) return std::nullopt;
        return rec[static_cast<std::size_t>(it->second)];
    };

    DatasetTable table;
    table.raw_row_count = static_cast<std::int64_t>(records.size()) - 1;
    table.rows.reserve(records.size() - 1);

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const auto kind_text = cell(rec, "track_kind");
        const auto kind = kind_text ? parse_track_kind(*kind_text) : std::nullopt;
        if (!kind) {
            ++table.dropped_row_count;
            continue;
        }
        DatasetRow row;
        row.kind = *kind;
        if (auto g = cell(rec, "genre")) {
            const std::string genre = normalize(*g);
            row.genre = genre.empty() ? "unknown" : genre;
        }
        if (auto v = cell(rec, "integrated_lufs")) row.integrated_lufs = parse_number(*v);
        if (auto v = cell(rec, "true_peak_dbtp")) row.true_peak_dbtp = parse_number(*v);
        if (auto v = cell(rec, "clipping")) row.clipping = parse_clipping(*v);
        if (auto v = cell(rec, "mono_compatible")) row.mono_compatible = parse_bool(*v);
        if (auto v = cell(rec, "phase_issue")) row.phase_issue = parse_bool(*v);
        if (auto v = cell(rec, "compression")) row.compression = parse_compression(*v);
        if (auto v = cell(rec, "stereo_field")) row.stereo_field = parse_stereo(*v);
        static const char* tonal_fields[4] = {"tonal_bass", "tonal_low_mid", "tonal_high_mid",
                                              "tonal_high"};
        for (int t = 0; t < 4; ++t)
            if (auto v = cell(rec, tonal_fields[t])) row.tonal[t] = parse_band_class(*v);
        table.rows.push_back(std::move(row));
    }
    return table;
}

double FrequencyGroup::proportion(const std::string& label) const {
    if (total == 0) return 0.0;
    for (const auto& [l, c] : counts)
        if (l == label) return static_cast<double>(c) / static_cast<double>(total);
    return 0.0;
}

std::vector<FrequencyGroup> frequency_distribution(const DatasetTable& table,
                                                   const std::string& field, bool group_by_kind,
                                                   bool group_by_genre) {
    if (field == "integrated_lufs" || field == "true_peak_dbtp")
        throw UnknownField("frequency distribution needs a categorical field, got " + field);

    std::vector<FrequencyGroup> groups;
    std::map<std::string, std::size_t> group_index;
    std::map<std::string, std::map<std::string, std::size_t>> label_index;

    for (const auto& row : table.rows) {
        const auto value = categorical_value(row, field);
        if (!value) continue;
        std::string key;
        if (group_by_kind) key = std::string(track_kind_name(row.kind));
        if (group_by_genre) key += (key.empty() ? "" : "/") + row.genre;
        if (key.empty()) key = "all";

        auto git = group_index.find(key);
        if (git == group_index.end()) {
            git = group_index.emplace(key, groups.size()).first;
            groups.push_back(FrequencyGroup{key, 0, {}});
        }
        FrequencyGroup& g = groups[git->second];
        ++g.total;
        auto& labels = label_index[key];
        auto lit = labels.find(*value);
        if (lit == labels.end()) {
            lit = labels.emplace(*value, g.counts.size()).first;
            g.counts.emplace_back(*value, 0);
        }
        ++g.counts[lit->second].second;
    }
    return groups;
}

std::optional<Direction> parse_direction(std::string_view text) {
    const std::string t = normalize(std::string(text));
    if (t == "above") return Direction::above;
    if (t == "below") return Direction::below;
    if (t == "above_or_equal" || t == "above-or-equal") return Direction::above_or_equal;
    if (t == "below_or_equal" || t == "below-or-equal") return Direction::below_or_equal;
    return std::nullopt;
}

ExceedanceResult threshold_exceedance(const DatasetTable& table, const std::string& field,
                                      double threshold, Direction direction,
                                      std::optional<TrackKind> kind) {
    ExceedanceResult result;
    for (const auto& row : table.rows) {
        if (kind && row.kind != *kind) continue;
        const auto v = numeric_value(row, field);
        if (!v) continue;
        ++result.denominator;
        bool beyond = false;
        switch (direction) {
            case Direction::above: beyond = *v > threshold; break;
            case Direction::below: beyond = *v < threshold; break;
            case Direction::above_or_equal: beyond = *v >= threshold; break;
            case Direction::below_or_equal: beyond = *v <= threshold; break;
        }
        if (beyond) ++result.count;
    }
    result.percentage = result.denominator > 0
                            ? 100.0 * static_cast<double>(result.count) /
                                  static_cast<double>(result.denominator)
                            : 0.0;
    return result;
}

ContingencyTable crosstab(const DatasetTable& table, const std::string& field_a,
                          const std::string& field_b, std::optional<TrackKind> kind) {
    ContingencyTable t;
    std::map<std::string, int> row_index, col_index;
    std::vector<std::pair<int, int>> cells;

    for (const auto& row : table.rows) {
        if (kind && row.kind != *kind) continue;
        const auto a = categorical_value(row, field_a);
        const auto b = categorical_value(row, field_b);
        if (!a || !b) continue;
        auto ra = row_index.find(*a);
        if (ra == row_index.end()) {
            ra = row_index.emplace(*a, static_cast<int>(t.row_labels.size())).first;
            t.row_labels.push_back(*a);
        }
        auto cb = col_index.find(*b);
        if (cb == col_index.end()) {
            cb = col_index.emplace(*b, static_cast<int>(t.col_labels.size())).first;
            t.col_labels.push_back(*b);
        }
        cells.emplace_back(ra->second, cb->second);
    }

    t.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.row_labels.size()),
                                     static_cast<Eigen::Index>(t.col_labels.size()));
    for (const auto& [i, j] : cells) t.counts(i, j) += 1.0;
    return t;
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma (series / continued fraction)
// ---------------------------------------------------------------------------

namespace {

double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
    // modified Lentz
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double regularized_gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw Error("regularized_gamma_q needs a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

double regularized_gamma_p(double a, double x) { return 1.0 - regularized_gamma_q(a, x); }

TestResult chi_square_test(const ContingencyTable& table) {
    const Eigen::MatrixXd& counts = table.counts;
    if (counts.size() == 0 || counts.minCoeff() < 0.0)
        throw DegenerateTable("contingency table must hold non-negative counts");

    // Collapse all-zero rows/columns before testing.
    std::vector<Eigen::Index> rows, cols;
    for (Eigen::Index i = 0; i < counts.rows(); ++i)
        if (counts.row(i).sum() > 0.0) rows.push_back(i);
    for (Eigen::Index j = 0; j < counts.cols(); ++j)
        if (counts.col(j).sum() > 0.0) cols.push_back(j);
    if (rows.size() < 2 || cols.size() < 2)
        throw DegenerateTable("need at least 2x2 non-empty categories, got " +
                              std::to_string(rows.size()) + "x" + std::to_string(cols.size()));

    Eigen::MatrixXd observed(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            observed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                counts(rows[i], cols[j]);

    const double n = observed.sum();
    const Eigen::VectorXd row_totals = observed.rowwise().sum();
    const Eigen::VectorXd col_totals = observed.colwise().sum();

    TestResult result;
    result.rows = static_cast<int>(rows.size());
    result.cols = static_cast<int>(cols.size());
    result.expected = row_totals * col_totals.transpose() / n;
    result.std_residuals =
        (observed - result.expected).array() / result.expected.array().sqrt();
    result.statistic =
        ((observed - result.expected).array().square() / result.expected.array()).sum();
    result.dof = (result.rows - 1) * (result.cols - 1);
    result.p_value = regularized_gamma_q(result.dof / 2.0, result.statistic / 2.0);
    return result;
}

double cramers_v(const ContingencyTable& table) {
    const TestResult t = chi_square_test(table);
    const double n = table.n();
    const double m = std::min(t.rows, t.cols) - 1;
    const double v = std::sqrt(t.statistic / (n * m));
    return std::clamp(v, 0.0, 1.0);
}

Histogram loudness_histogram(const DatasetTable& table, std::optional<TrackKind> kind,
                             LoudnessField field, double bin_width) {
    if (!(bin_width > 0.0)) throw Error("bin width must be positive");
    Histogram h;
    h.lo = field == LoudnessField::integrated_lufs ? -60.0 : -30.0;
    h.hi = 6.0;
    h.bin_width = bin_width;
    const auto bins = static_cast<std::size_t>(std::ceil((h.hi - h.lo) / bin_width - 1e-9));
    h.counts.assign(bins, 0);
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = h.lo + static_cast<double>(i) * bin_width;

    const std::string name =
        field == LoudnessField::integrated_lufs ? "integrated_lufs" : "true_peak_dbtp";
    for (const auto& row : table.rows) {
        if (kind && row.kind != *kind) continue;
        const auto v = numeric_value(row, name);
        if (!v) continue;
        if (*v < h.lo || *v > h.hi || !std::isfinite(*v)) {
            ++h.out_of_range;
            continue;
        }
        auto idx = static_cast<std::size_t>((*v - h.lo) / bin_width);
        if (idx >= bins) idx = bins - 1;  // hi edge falls into the last bin
        ++h.counts[idx];
        ++h.in_range;
    }

    h.densities.assign(bins, 0.0);
    if (h.in_range > 0) {
        for (std::size_t i = 0; i < bins; ++i)
            h.densities[i] = static_cast<double>(h.counts[i]) /
                             (static_cast<double>(h.in_range) * bin_width);
    }
    return h;
}

std::set<IssueKind> issues_from_row(const DatasetRow& row, const IssueThresholds& thresholds) {
    thresholds.validate();
    std::set<IssueKind> issues;
    const bool master = row.kind == TrackKind::master;
    if (row.integrated_lufs) {
        const double loud = master ? thresholds.master_too_loud_lufs : thresholds.mix_too_loud_lufs;
        const double quiet =
            master ? thresholds.master_too_quiet_lufs : thresholds.mix_too_quiet_lufs;
        if (*row.integrated_lufs > loud) issues.insert(IssueKind::too_loud);
        if (*row.integrated_lufs < quiet) issues.insert(IssueKind::too_quiet);
    }
    if (row.clipping && *row.clipping != ClippingSeverity::none)
        issues.insert(IssueKind::clipping);
    if (row.compression) {
        if (*row.compression == CompressionVerdict::overcompressed)
            issues.insert(IssueKind::overcompression);
        else if (*row.compression == CompressionVerdict::undercompressed)
            issues.insert(IssueKind::undercompression);
    }
    if (row.stereo_field) {
        const auto& categories = master ? thresholds.master_stereo_issue_categories
                                        : thresholds.mix_stereo_issue_categories;
        bool flagged = categories.count(*row.stereo_field) > 0;
        if (!flagged && !master && thresholds.mix_wide_with_phase_issue &&
            *row.stereo_field == StereoCategory::wide && row.phase_issue && *row.phase_issue)
            flagged = true;
        if (flagged) issues.insert(IssueKind::stereo_field_issues);
    }
    if (row.phase_issue && *row.phase_issue) issues.insert(IssueKind::phase_issues);
    if (row.mono_compatible && !*row.mono_compatible)
        issues.insert(IssueKind::lack_of_mono_compatibility);
    return issues;
}

} // namespace mixqa
