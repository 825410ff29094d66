#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixqa/analysis_results.hpp"
#include "mixqa/report.hpp"

namespace mixqa {

// ---------------------------------------------------------------------------
// Dataset ingestion
// ---------------------------------------------------------------------------

struct DatasetRow {
    TrackKind kind = TrackKind::mix;
    std::string genre = "unknown";
    std::optional<double> integrated_lufs;
    std::optional<double> true_peak_dbtp;
    std::optional<ClippingSeverity> clipping;
    std::optional<bool> mono_compatible;
    std::optional<bool> phase_issue;
    std::optional<CompressionVerdict> compression;
    std::optional<StereoCategory> stereo_field;
    std::array<std::optional<BandClass>, 4> tonal;  // bass, low mid, high mid, high
};

struct DatasetTable {
    std::vector<DatasetRow> rows;
    std::int64_t raw_row_count = 0;      // data rows in the file
    std::int64_t dropped_row_count = 0;  // rows with an unparseable track kind
};

// Canonical field names accepted by every analysis below.
inline const std::vector<std::string> kDatasetFields = {
    "track_kind",   "genre",         "integrated_lufs", "true_peak_dbtp", "clipping",
    "mono_compatible", "phase_issue", "compression",     "stereo_field",   "tonal_bass",
    "tonal_low_mid", "tonal_high_mid", "tonal_high",
};

/// Binds canonical field names to the raw CSV's column headers. Fields
/// without a binding default to a column named like the field itself.
struct ColumnMapping {
    std::map<std::string, std::string> bindings;
};

/// Parse a `canonical = Raw Header` key-value mapping file ('#' comments).
ColumnMapping load_column_mapping(const std::filesystem::path& path);

/// Load a metrics CSV into typed rows. Categorical strings are normalized
/// case-insensitively; rows whose track kind cannot be parsed are dropped
/// and tallied; other unparseable fields are left empty per row. Throws
/// EmptyFile for a header-only file and MissingColumn when an explicitly
/// mapped column (or the track-kind column) is absent — the error message
/// lists the file's actual headers.
DatasetTable load_dataset(const std::filesystem::path& path, const ColumnMapping& mapping = {});

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

struct FrequencyGroup {
    std::string group;  // e.g. "mix", "master/rock", "all"
    std::int64_t total = 0;
    std::vector<std::pair<std::string, std::int64_t>> counts;  // first-appearance order

    double proportion(const std::string& label) const;
};

/// Frequency distribution of a categorical field, optionally grouped by
/// track kind and/or genre. Throws UnknownField.
std::vector<FrequencyGroup> frequency_distribution(const DatasetTable& table,
                                                   const std::string& field,
                                                   bool group_by_kind = false,
                                                   bool group_by_genre = false);

enum class Direction { above, below, above_or_equal, below_or_equal };

std::optional<Direction> parse_direction(std::string_view text);

struct ExceedanceResult {
    double percentage = 0.0;        // of non-missing rows
    std::int64_t count = 0;
    std::int64_t denominator = 0;   // rows with the field present
};

/// Percentage of rows whose numeric field lies beyond the threshold in the
/// given direction. Rows missing the field are excluded from the
/// denominator. Throws UnknownField for non-numeric fields.
ExceedanceResult threshold_exceedance(const DatasetTable& table, const std::string& field,
                                      double threshold, Direction direction,
                                      std::optional<TrackKind> kind = std::nullopt);

// ---------------------------------------------------------------------------
// Contingency tables, chi-square, Cramér's V
// ---------------------------------------------------------------------------

struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Eigen::MatrixXd counts;  // r x c, non-negative

    double n() const { return counts.sum(); }
};

/// Joint counts of two categorical fields; label order is first appearance.
/// Throws UnknownField.
ContingencyTable crosstab(const DatasetTable& table, const std::string& field_a,
                          const std::string& field_b,
                          std::optional<TrackKind> kind = std::nullopt);

struct TestResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int rows = 0, cols = 0;          // dimensions after degenerate collapse
    Eigen::MatrixXd expected;        // row_total * col_total / n
    Eigen::MatrixXd std_residuals;   // (observed - expected) / sqrt(expected)
};

/// Pearson chi-square test of independence. All-zero rows/columns are
/// collapsed first; if fewer than 2x2 categories remain, throws
/// DegenerateTable. p-value is the upper tail Q(dof/2, statistic/2).
TestResult chi_square_test(const ContingencyTable& table);

/// V = sqrt(chi2 / (n * (min(r, c) - 1))), in [0, 1].
double cramers_v(const ContingencyTable& table);

/// Regularized incomplete gamma Q(a, x) (upper) and P(a, x) (lower),
/// series expansion for x < a + 1, continued fraction otherwise.
double regularized_gamma_q(double a, double x);
double regularized_gamma_p(double a, double x);

// ---------------------------------------------------------------------------
// Histograms and per-row issue flags
// ---------------------------------------------------------------------------

struct Histogram {
    double lo = 0.0, hi = 0.0, bin_width = 0.0;
    std::vector<double> edges;      // bins + 1 values
    std::vector<std::int64_t> counts;
    std::vector<double> densities;  // integrates to 1 over in-range mass
    std::int64_t in_range = 0;
    std::int64_t out_of_range = 0;
};

enum class LoudnessField { integrated_lufs, true_peak_dbtp };

/// Density-normalized histogram over the fixed display range
/// ([-60, +6] LUFS or [-30, +6] dBTP); out-of-range rows are tallied apart.
Histogram loudness_histogram(const DatasetTable& table, std::optional<TrackKind> kind,
                             LoudnessField field, double bin_width);

/// Issue flags implied by one dataset row, using the same loudness policy
/// as report classification. Fields the row lacks contribute no flags.
std::set<IssueKind> issues_from_row(const DatasetRow& row, const IssueThresholds& thresholds = {});

} // namespace mixqa
