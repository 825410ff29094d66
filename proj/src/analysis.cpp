#include "mixqa/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mixqa/dsp.hpp"

namespace mixqa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLoudnessOffset = -0.691;  // calibrates the K-filter's 997 Hz gain
constexpr double kAbsoluteGateLufs = -70.0;
constexpr double kRelativeGateLu = 10.0;

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

// Band index for a bin frequency, or -1 when outside 20 Hz - 20 kHz.
int band_index(double f) {
    if (f < kTonalBands[0].first || f > kTonalBands[3].second) return -1;
    for (int i = 0; i < 3; ++i)
        if (f < kTonalBands[i].second) return i;
    return 3;
}

Eigen::ArrayXd k_weighted(const Eigen::Ref<const Eigen::ArrayXd>& channel, int sample_rate) {
    auto [shelf, highpass] = k_weighting(sample_rate);
    return biquad_filter(biquad_filter(channel, shelf), highpass);
}

} // namespace

std::string_view track_kind_name(TrackKind kind) {
    return kind == TrackKind::mix ? "mix" : "master";
}

std::optional<TrackKind> parse_track_kind(std::string_view text) {
    const std::string t = lowercase(trim(std::string(text)));
    if (t == "mix" || t == "mixes" || t == "mixed") return TrackKind::mix;
    if (t == "master" || t == "masters" || t == "mastered") return TrackKind::master;
    return std::nullopt;
}

std::string_view clipping_severity_name(ClippingSeverity s) {
    switch (s) {
        case ClippingSeverity::none: return "none";
        case ClippingSeverity::minor: return "minor";
        case ClippingSeverity::major: return "major";
    }
    return "none";
}

std::string_view compression_verdict_name(CompressionVerdict v) {
    switch (v) {
        case CompressionVerdict::undercompressed: return "undercompressed";
        case CompressionVerdict::optimal: return "optimal";
        case CompressionVerdict::overcompressed: return "overcompressed";
    }
    return "optimal";
}

std::string_view stereo_category_name(StereoCategory c) {
    switch (c) {
        case StereoCategory::mono: return "mono";
        case StereoCategory::narrow: return "narrow";
        case StereoCategory::balanced: return "balanced";
        case StereoCategory::wide: return "wide";
    }
    return "mono";
}

std::string_view band_class_name(BandClass b) {
    switch (b) {
        case BandClass::low: return "low";
        case BandClass::medium: return "medium";
        case BandClass::high: return "high";
    }
    return "low";
}

// ---------------------------------------------------------------------------
// Genre profiles
// ---------------------------------------------------------------------------

void GenreProfile::validate() const {
    if (!(dr_low_db < dr_high_db))
        throw ConfigError("profile '" + genre + "': dr_low_db must be below dr_high_db");
    for (int i = 0; i < 4; ++i) {
        if (!(band_low_threshold(i) > 0.0 && band_low_threshold(i) < band_high_threshold(i) &&
              band_high_threshold(i) < 1.0))
            throw ConfigError("profile '" + genre + "': band thresholds must satisfy 0 < low < high < 1");
    }
}

GenreProfileSet::GenreProfileSet() {
    GenreProfile def;
    profiles_.emplace(def.genre, def);
}

void GenreProfileSet::insert(GenreProfile profile) {
    profile.validate();
    profiles_[profile.genre] = std::move(profile);
}

const GenreProfile& GenreProfileSet::lookup(const std::string& genre) const {
    auto it = profiles_.find(lowercase(trim(genre)));
    if (it != profiles_.end()) return it->second;
    return profiles_.at("default");
}

GenreProfileSet load_genre_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open genre profile config: " + path.string());

    GenreProfileSet set;
    GenreProfile current;
    bool in_section = false;

    auto flush = [&] {
        if (in_section) set.insert(current);
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            flush();
            current = GenreProfile{};
            current.genre = lowercase(trim(s.substr(1, s.size() - 2)));
            if (current.genre.empty())
                throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty genre name");
            in_section = true;
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos || !in_section)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value' inside a [genre] section");
        const std::string key = lowercase(trim(s.substr(0, eq)));
        const std::string value = trim(s.substr(eq + 1));
        std::istringstream vs(value);
        if (key == "dr_low_db") {
            vs >> current.dr_low_db;
        } else if (key == "dr_high_db") {
            vs >> current.dr_high_db;
        } else if (key == "band_low" || key == "band_high") {
            Eigen::Array4d v;
            for (int i = 0; i < 4; ++i) vs >> v(i);
            (key == "band_low" ? current.band_low_threshold : current.band_high_threshold) = v;
        } else {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (vs.fail())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
    flush();
    return set;
}

// ---------------------------------------------------------------------------
// Analyzers
// ---------------------------------------------------------------------------

std::optional<double> integrated_loudness(const AudioBuffer& buffer) {
    const int fs = buffer.sample_rate;
    const auto block = static_cast<Eigen::Index>(std::lround(0.4 * fs));
    const auto step = static_cast<Eigen::Index>(std::lround(0.1 * fs));
    if (buffer.length() < block)
        throw TooShort("integrated loudness needs >= 400 ms of audio");

    Eigen::ArrayXXd weighted(buffer.length(), buffer.channel_count());
    for (Eigen::Index c = 0; c < buffer.channel_count(); ++c)
        weighted.col(c) = k_weighted(buffer.samples.col(c), fs);

    // 400 ms blocks, 75% overlap; block power = sum of channel mean squares.
    const Eigen::Index blocks = (buffer.length() - block) / step + 1;
    Eigen::ArrayXd power(blocks);
    for (Eigen::Index j = 0; j < blocks; ++j)
        power(j) = weighted.middleRows(j * step, block).square().colwise().mean().sum();

    const double absolute_gate_power =
        std::pow(10.0, (kAbsoluteGateLufs - kLoudnessOffset) / 10.0);

    double sum = 0.0;
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < blocks; ++j) {
        if (power(j) > absolute_gate_power) {
            sum += power(j);
            ++kept;
        }
    }
    if (kept == 0) return std::nullopt;

    const double relative_gate_power = (sum / kept) * std::pow(10.0, -kRelativeGateLu / 10.0);
    const double gate = std::max(absolute_gate_power, relative_gate_power);

    sum = 0.0;
    kept = 0;
    for (Eigen::Index j = 0; j < blocks; ++j) {
        if (power(j) > gate) {
            sum += power(j);
            ++kept;
        }
    }
    if (kept == 0) return std::nullopt;
    return kLoudnessOffset + 10.0 * std::log10(sum / kept);
}

double true_peak(const AudioBuffer& buffer) {
    if (buffer.length() == 0) return -kInf;
    // Raw samples are always consulted (the oversampled grid contains them,
    // but edge regions are skipped below); intersample values are read only
    // where the interpolation window sees real samples, so the boundary
    // extension cannot ring a steady signal above its true peak.
    double peak = buffer.samples.abs().maxCoeff();
    constexpr Eigen::Index kEdge = 96;  // interpolation half-span at the 4x rate
    for (Eigen::Index c = 0; c < buffer.channel_count(); ++c) {
        const Eigen::ArrayXd up = oversample_4x(buffer.samples.col(c));
        if (up.size() > 2 * kEdge)
            peak = std::max(peak, up.segment(kEdge, up.size() - 2 * kEdge).abs().maxCoeff());
    }
    return peak > 0.0 ? 20.0 * std::log10(peak) : -kInf;
}

ClippingReport detect_clipping(const AudioBuffer& buffer) {
    ClippingReport r;
    r.clipped_sample_count = (buffer.samples.abs() >= kClipThreshold).count();
    if (r.clipped_sample_count == 0)
        r.severity = ClippingSeverity::none;
    else if (r.clipped_sample_count > 10000)
        r.severity = ClippingSeverity::major;
    else
        r.severity = ClippingSeverity::minor;
    return r;
}

double dynamic_range(const AudioBuffer& buffer) {
    if (buffer.length() == 0) throw SilentInput("empty buffer");
    const double mean_abs = buffer.samples.abs().mean();
    if (mean_abs == 0.0) throw SilentInput("mean amplitude is zero");
    const double max_abs = buffer.samples.abs().maxCoeff();
    if ((buffer.samples.abs() == max_abs).all()) return 0.0;  // max = mean, exactly
    return std::max(0.0, 20.0 * std::log10(max_abs / mean_abs));
}

CompressionResult classify_compression(double dynamic_range_db, const std::string& genre,
                                       const GenreProfileSet& profiles) {
    const GenreProfile& p = profiles.lookup(genre);
    CompressionResult r;
    r.dynamic_range_db = dynamic_range_db;
    r.genre_used = p.genre;
    if (dynamic_range_db > p.dr_high_db)
        r.verdict = CompressionVerdict::undercompressed;
    else if (dynamic_range_db < p.dr_low_db)
        r.verdict = CompressionVerdict::overcompressed;
    else
        r.verdict = CompressionVerdict::optimal;
    return r;
}

StereoResult stereo_width(const AudioBuffer& buffer, const StereoThresholds& thresholds) {
    if (!buffer.is_stereo()) throw NotStereo("stereo width needs 2 channels");

    const auto block = static_cast<Eigen::Index>(std::lround(0.4 * buffer.sample_rate));
    const double gate = std::pow(10.0, thresholds.block_gate_dbfs / 20.0);
    double sum_abs_ild = 0.0;
    Eigen::Index used = 0;
    for (Eigen::Index start = 0; start + block <= buffer.length(); start += block) {
        const double rms_l = std::sqrt(buffer.samples.col(0).segment(start, block).square().mean());
        const double rms_r = std::sqrt(buffer.samples.col(1).segment(start, block).square().mean());
        if (rms_l > gate && rms_r > gate) {
            sum_abs_ild += std::abs(20.0 * std::log10(rms_l / rms_r));
            ++used;
        }
    }

    StereoResult r;
    r.ild_db = used > 0 ? sum_abs_ild / used : 0.0;

    const double e_mid = ((buffer.samples.col(0) + buffer.samples.col(1)) / 2.0).square().sum();
    const double e_side = ((buffer.samples.col(0) - buffer.samples.col(1)) / 2.0).square().sum();
    if (e_side == 0.0)
        r.side_mid_energy_ratio_db = -kInf;
    else if (e_mid == 0.0)
        r.side_mid_energy_ratio_db = kInf;
    else
        r.side_mid_energy_ratio_db = 10.0 * std::log10(e_side / e_mid);

    if (r.side_mid_energy_ratio_db < thresholds.mono_ratio_db)
        r.category = StereoCategory::mono;
    else if (r.side_mid_energy_ratio_db < thresholds.narrow_ratio_db)
        r.category = StereoCategory::narrow;
    else if (r.side_mid_energy_ratio_db > thresholds.wide_ratio_db)
        r.category = StereoCategory::wide;
    else
        r.category = StereoCategory::balanced;
    return r;
}

MonoCompatResult mono_compatibility(const AudioBuffer& buffer,
                                    const MonoCompatThresholds& thresholds) {
    if (!buffer.is_stereo()) throw NotStereo("mono compatibility needs 2 channels");

    auto [mid, side] = to_mid_side(buffer);
    const double e_mid = mid.square().sum();
    const double e_l = buffer.samples.col(0).square().sum();
    const double e_r = buffer.samples.col(1).square().sum();
    const double stereo_mean = (e_l + e_r) / 2.0;

    MonoCompatResult r;
    if (stereo_mean == 0.0)
        r.folddown_loss_db = 0.0;  // silence folds down losslessly
    else if (e_mid == 0.0)
        r.folddown_loss_db = -kInf;
    else
        r.folddown_loss_db = 10.0 * std::log10(e_mid / stereo_mean);

    const Eigen::ArrayXd mid_c = mid - mid.mean();
    const Eigen::ArrayXd side_c = side - side.mean();
    const double var_m = mid_c.square().sum();
    const double var_s = side_c.square().sum();
    r.mid_side_correlation =
        (var_m == 0.0 || var_s == 0.0) ? 0.0 : (mid_c * side_c).sum() / std::sqrt(var_m * var_s);

    r.compatible = r.folddown_loss_db >= thresholds.min_folddown_db &&
                   std::abs(r.mid_side_correlation) <= thresholds.max_abs_correlation;
    return r;
}

PhaseResult phase_issues(const AudioBuffer& buffer, const PhaseThresholds& thresholds) {
    if (!buffer.is_stereo()) throw NotStereo("phase analysis needs 2 channels");
    if (buffer.length() < kStftFrameLength)
        throw TooShort("phase analysis needs at least one STFT frame");

    // Bin amplitude gate: sine-amplitude calibration, with Hann window sum
    // n/2 a full-scale sine reads |X| = n/4 in its bin.
    const double window_sum = static_cast<double>(kStftFrameLength) / 2.0;
    const double gate_magnitude = std::pow(10.0, thresholds.bin_gate_dbfs / 20.0) * window_sum / 2.0;

    double sum = 0.0;
    std::int64_t qualifying = 0;
    for (Eigen::Index start = 0; start + kStftFrameLength <= buffer.length();
         start += kStftHop) {
        const Spectrum left = stft_frame(buffer.samples.col(0).segment(start, kStftFrameLength),
                                         Window::hann, buffer.sample_rate);
        const Spectrum right = stft_frame(buffer.samples.col(1).segment(start, kStftFrameLength),
                                          Window::hann, buffer.sample_rate);
        for (Eigen::Index k = 0; k < left.bin_frequencies.size(); ++k) {
            const double f = left.bin_frequencies(k);
            if (f < 20.0 || f > 20000.0) continue;
            if (left.magnitudes(k) <= gate_magnitude || right.magnitudes(k) <= gate_magnitude)
                continue;
            sum += std::abs(std::remainder(left.phases(k) - right.phases(k), 2.0 * std::numbers::pi));
            ++qualifying;
        }
    }

    PhaseResult r;
    r.mean_abs_phase_diff_rad = qualifying > 0 ? sum / qualifying : 0.0;
    r.has_issue = r.mean_abs_phase_diff_rad > thresholds.issue_rad;
    return r;
}

TonalProfile tonal_profile(const AudioBuffer& buffer, const std::string& genre,
                           const GenreProfileSet& profiles) {
    if (buffer.length() < kStftFrameLength)
        throw TooShort("tonal profile needs at least one STFT frame");

    Eigen::Array4d band_power = Eigen::Array4d::Zero();
    for (Eigen::Index c = 0; c < buffer.channel_count(); ++c) {
        for (Eigen::Index start = 0; start + kStftFrameLength <= buffer.length();
             start += kStftHop) {
            const Spectrum s = stft_frame(buffer.samples.col(c).segment(start, kStftFrameLength),
                                          Window::hann, buffer.sample_rate);
            for (Eigen::Index k = 0; k < s.bin_frequencies.size(); ++k) {
                const int band = band_index(s.bin_frequencies(k));
                if (band >= 0) band_power(band) += s.magnitudes(k) * s.magnitudes(k);
            }
        }
    }

    TonalProfile profile;
    const double total = band_power.sum();
    if (total > 0.0) profile.band_energy_fraction = band_power / total;

    const GenreProfile& p = profiles.lookup(genre);
    for (int i = 0; i < 4; ++i) {
        const double frac = profile.band_energy_fraction(i);
        if (frac < p.band_low_threshold(i))
            profile.band_class[i] = BandClass::low;
        else if (frac > p.band_high_threshold(i))
            profile.band_class[i] = BandClass::high;
        else
            profile.band_class[i] = BandClass::medium;
    }
    return profile;
}

AnalysisReport analyze_track(const AudioBuffer& buffer, const FileMeta& meta, TrackKind kind,
                             const std::string& genre, const AnalysisConfig& config) {
    AnalysisReport report;
    report.kind = kind;
    report.genre = genre;
    report.file_meta = meta;

    LoudnessResult loudness;
    loudness.true_peak_dbtp = true_peak(buffer);
    try {
        loudness.integrated_lufs = integrated_loudness(buffer);
    } catch (const Error& e) {
        report.skipped["integrated_loudness"] = e.what();
    }
    report.loudness = loudness;

    report.clipping = detect_clipping(buffer);

    try {
        report.compression = classify_compression(dynamic_range(buffer), genre, config.profiles);
    } catch (const Error& e) {
        report.skipped["compression"] = e.what();
    }

    if (buffer.is_stereo()) {
        try {
            report.stereo = stereo_width(buffer, config.stereo);
        } catch (const Error& e) {
            report.skipped["stereo_width"] = e.what();
        }
        try {
            report.mono_compat = mono_compatibility(buffer, config.mono_compat);
        } catch (const Error& e) {
            report.skipped["mono_compatibility"] = e.what();
        }
        try {
            report.phase = phase_issues(buffer, config.phase);
        } catch (const Error& e) {
            report.skipped["phase"] = e.what();
        }
    } else {
        report.skipped["stereo_width"] = "not applicable to mono input";
        report.skipped["mono_compatibility"] = "not applicable to mono input";
        report.skipped["phase"] = "not applicable to mono input";
    }

    try {
        report.tonal = tonal_profile(buffer, genre, config.profiles);
    } catch (const Error& e) {
        report.skipped["tonal"] = e.what();
    }

    report.issues = classify_issues(report, config.issues);
    return report;
}

} // namespace mixqa
