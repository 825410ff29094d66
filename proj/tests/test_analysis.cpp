#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixqa/analysis.hpp"
#include "mixqa/dsp.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mixqa;
using Eigen::ArrayXd;

namespace {

constexpr double kPi = std::numbers::pi;

AudioBuffer conformance_sine(double level_dbfs, int rate, double seconds = 20.0) {
    const double amplitude = std::pow(10.0, level_dbfs / 20.0);
    const ArrayXd x = testutil::sine(997.0, rate, seconds, amplitude);
    return testutil::stereo_buffer(x, x, rate);
}

// Broadband noise with a crest factor inside the default [8, 14] dB band:
// gaussian clipped at 3 sigma gives ~11.5 dB.
ArrayXd shaped_noise(Eigen::Index n, double sigma, unsigned seed) {
    return testutil::gaussian_noise(n, sigma, seed).min(3.0 * sigma).max(-3.0 * sigma);
}

AudioBuffer nominal_master(int rate = 48000, double seconds = 5.0) {
    const auto n = static_cast<Eigen::Index>(seconds * rate);
    return testutil::stereo_buffer(shaped_noise(n, 0.07, 101), shaped_noise(n, 0.07, 202), rate);
}

// Tones on exact STFT bins with per-tone phase offsets between channels;
// every qualifying bin is far from the amplitude gate.
AudioBuffer phase_tone_pair(const std::vector<std::pair<int, double>>& bins_and_offsets,
                            Eigen::Index n, int rate) {
    ArrayXd left = ArrayXd::Zero(n), right = ArrayXd::Zero(n);
    for (const auto& [bin, offset] : bins_and_offsets) {
        const double w = 2.0 * kPi * bin / 4096.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            left(i) += 0.2 * std::cos(w * static_cast<double>(i));
            right(i) += 0.2 * std::cos(w * static_cast<double>(i) + offset);
        }
    }
    return testutil::stereo_buffer(left, right, rate);
}

} // namespace

// ---------------------------------------------------------------------------
// integrated loudness
// ---------------------------------------------------------------------------

TEST_CASE("integrated loudness matches the conformance sine levels") {
    const auto at = [](double level, int rate) {
        const auto lufs = integrated_loudness(conformance_sine(level, rate));
        REQUIRE(lufs.has_value());
        return *lufs;
    };
    CHECK(std::abs(at(-23.0, 48000) - (-23.0)) < 0.1);
    CHECK(std::abs(at(-33.0, 48000) - (-33.0)) < 0.1);
    CHECK(std::abs(at(-23.0, 44100) - (-23.0)) < 0.1);
}

TEST_CASE("integrated loudness of digital silence is undefined") {
    const AudioBuffer b =
        testutil::stereo_buffer(ArrayXd::Zero(240000), ArrayXd::Zero(240000), 48000);
    CHECK_FALSE(integrated_loudness(b).has_value());
}

TEST_CASE("integrated loudness requires 400 ms") {
    const AudioBuffer b = testutil::mono_buffer(ArrayXd::Constant(19199, 0.1), 48000);
    CHECK_THROWS_AS(integrated_loudness(b), TooShort);
    CHECK(integrated_loudness(testutil::mono_buffer(ArrayXd::Constant(19200, 0.1), 48000))
              .has_value());
}

TEST_CASE("relative gate drops a quiet tail") {
    // 5 s at a solid level then 5 s at -30 dB relative: the quiet half falls
    // more than 10 LU under the ungated mean and must not dilute the result
    const ArrayXd loud = testutil::sine(997.0, 48000, 5.0, 0.3);
    const ArrayXd quiet = testutil::sine(997.0, 48000, 5.0, 0.3 * std::pow(10.0, -30.0 / 20.0));
    ArrayXd x(loud.size() + quiet.size());
    x << loud, quiet;
    const auto whole = integrated_loudness(testutil::stereo_buffer(x, x, 48000));
    const auto loud_only = integrated_loudness(testutil::stereo_buffer(loud, loud, 48000));
    REQUIRE(whole.has_value());
    REQUIRE(loud_only.has_value());
    CHECK(*whole == doctest::Approx(*loud_only).epsilon(0.05));
}

// ---------------------------------------------------------------------------
// true peak
// ---------------------------------------------------------------------------

TEST_CASE("true peak of silence is -infinity") {
    const AudioBuffer b = testutil::mono_buffer(ArrayXd::Zero(1000), 48000);
    CHECK(true_peak(b) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("true peak of a constant 0.5 is -6.02 dBTP") {
    const AudioBuffer b = testutil::mono_buffer(ArrayXd::Constant(4800, 0.5), 48000);
    CHECK(true_peak(b) == doctest::Approx(-6.02).epsilon(0.02));
}

TEST_CASE("true peak sees the intersample peak of a quarter-rate sine") {
    const ArrayXd x = testutil::sine(12000.0, 48000, 0.1, 1.0, kPi / 4.0);
    const AudioBuffer b = testutil::mono_buffer(x, 48000);
    const double sample_peak_db = 20.0 * std::log10(x.abs().maxCoeff());
    CHECK(sample_peak_db == doctest::Approx(-3.01).epsilon(0.01));

    const double tp = true_peak(b);
    CHECK(std::abs(tp - 0.0) <= 0.3);

    const double oracle_db = 20.0 * std::log10(oracles::sinc_interpolated_peak(x));
    CHECK(std::abs(tp - oracle_db) < 0.1);
}

TEST_CASE("true peak never reads below the sample peak") {
    for (unsigned seed : {1u, 2u, 3u}) {
        const ArrayXd x = testutil::uniform_noise(2000, 0.8, seed);
        const AudioBuffer b = testutil::mono_buffer(x, 48000);
        CHECK(true_peak(b) >= 20.0 * std::log10(x.abs().maxCoeff()) - 0.01);
    }
    // isolated impulse: the bandlimited peak is the sample itself
    ArrayXd impulse = ArrayXd::Zero(400);
    impulse(53) = 0.9;
    CHECK(true_peak(testutil::mono_buffer(impulse, 48000)) >=
          20.0 * std::log10(0.9) - 0.01);
}

// ---------------------------------------------------------------------------
// clipping
// ---------------------------------------------------------------------------

TEST_CASE("clipping counts and severity boundaries") {
    auto with_clipped = [](std::int64_t count) {
        ArrayXd x = ArrayXd::Constant(11000, 0.5);
        for (std::int64_t i = 0; i < count; ++i) x(i) = i % 2 == 0 ? 1.0 : -1.0;
        return detect_clipping(testutil::mono_buffer(x, 48000));
    };
    CHECK(with_clipped(0).severity == ClippingSeverity::none);
    CHECK(with_clipped(0).clipped_sample_count == 0);
    CHECK(with_clipped(1).severity == ClippingSeverity::minor);
    CHECK(with_clipped(500).clipped_sample_count == 500);
    CHECK(with_clipped(500).severity == ClippingSeverity::minor);
    CHECK(with_clipped(10000).severity == ClippingSeverity::minor);  // "over 10000" is strict
    CHECK(with_clipped(10001).severity == ClippingSeverity::major);
}

TEST_CASE("normalized integer full scale counts as clipped") {
    ArrayXd x = ArrayXd::Constant(10, 0.5);
    x(0) = 32767.0 / 32768.0;   // positive 16-bit full scale
    x(1) = -1.0;
    const auto r = detect_clipping(testutil::mono_buffer(x, 48000));
    CHECK(r.clipped_sample_count == 2);
}

TEST_CASE("adding clipped samples never decreases the count") {
    ArrayXd x = testutil::uniform_noise(5000, 0.9, 31);
    auto before = detect_clipping(testutil::mono_buffer(x, 48000));
    for (int i = 0; i < 20; ++i) x(100 + i) = 1.0;
    auto after = detect_clipping(testutil::mono_buffer(x, 48000));
    CHECK(after.clipped_sample_count >= before.clipped_sample_count);
}

// ---------------------------------------------------------------------------
// dynamic range / compression
// ---------------------------------------------------------------------------

TEST_CASE("dynamic range of a constant signal is exactly 0") {
    const AudioBuffer b = testutil::mono_buffer(ArrayXd::Constant(1000, 0.25), 48000);
    CHECK(dynamic_range(b) == 0.0);
}

TEST_CASE("dynamic range of a full-scale sine is 20*log10(pi/2)") {
    const ArrayXd x = testutil::sine(997.0, 48000, 1.0, 1.0);
    CHECK(dynamic_range(testutil::mono_buffer(x, 48000)) ==
          doctest::Approx(20.0 * std::log10(kPi / 2.0)).epsilon(1e-4));
}

TEST_CASE("dynamic range of a sparse-peak signal") {
    // 1% of samples at 1.0, 99% at 0.01: DR = 20*log10(1 / 0.0199)
    const Eigen::Index n = 10000;
    ArrayXd x = ArrayXd::Constant(n, 0.01);
    for (Eigen::Index i = 0; i < n; i += 100) x(i) = 1.0;
    CHECK(dynamic_range(testutil::mono_buffer(x, 48000)) ==
          doctest::Approx(20.0 * std::log10(1.0 / 0.0199)).epsilon(1e-6));
}

TEST_CASE("dynamic range rejects silence and never goes negative") {
    CHECK_THROWS_AS(dynamic_range(testutil::mono_buffer(ArrayXd::Zero(100), 48000)), SilentInput);
    for (unsigned seed : {5u, 6u, 7u}) {
        const ArrayXd x = testutil::uniform_noise(3000, 0.7, seed);
        CHECK(dynamic_range(testutil::mono_buffer(x, 48000)) >= 0.0);
    }
}

TEST_CASE("compression verdict against the genre band") {
    GenreProfileSet profiles;  // default band [8, 14]
    CHECK(classify_compression(16.0, "default", profiles).verdict ==
          CompressionVerdict::undercompressed);
    CHECK(classify_compression(11.0, "default", profiles).verdict ==
          CompressionVerdict::optimal);
    CHECK(classify_compression(5.0, "default", profiles).verdict ==
          CompressionVerdict::overcompressed);

    SUBCASE("unknown genre falls back to default") {
        const auto r = classify_compression(11.0, "zydeco-fusion", profiles);
        CHECK(r.genre_used == "default");
        CHECK(r.verdict == CompressionVerdict::optimal);
    }
    SUBCASE("known genre uses its own band") {
        GenreProfile tight;
        tight.genre = "edm";
        tight.dr_low_db = 4.0;
        tight.dr_high_db = 9.0;
        profiles.insert(tight);
        const auto r = classify_compression(11.0, "edm", profiles);
        CHECK(r.genre_used == "edm");
        CHECK(r.verdict == CompressionVerdict::undercompressed);
    }
}

TEST_CASE("genre profile config parsing") {
    testutil::TempDir tmp("profiles");
    SUBCASE("sections and values") {
        const auto conf = tmp.path() / "p.conf";
        testutil::write_file(conf,
                             "# comment\n"
                             "[default]\n"
                             "dr_low_db = 7\n"
                             "dr_high_db = 13\n"
                             "band_low = 0.04 0.1 0.1 0.04\n"
                             "band_high = 0.3 0.5 0.5 0.3\n"
                             "\n"
                             "[Drum'n'Bass]\n"
                             "dr_low_db = 4\n"
                             "dr_high_db = 9\n");
        const auto set = load_genre_profiles(conf);
        CHECK(set.lookup("default").dr_low_db == 7.0);
        CHECK(set.lookup("default").band_high_threshold(1) == 0.5);
        // section names normalize case-insensitively
        CHECK(set.lookup("drum'n'bass").dr_high_db == 9.0);
        // unset keys keep the built-in defaults
        CHECK(set.lookup("drum'n'bass").band_low_threshold(0) == 0.05);
        // unknown genres inherit default
        CHECK(set.lookup("polka").dr_low_db == 7.0);
    }
    SUBCASE("invariant violations are rejected") {
        const auto conf = tmp.path() / "bad.conf";
        testutil::write_file(conf, "[default]\ndr_low_db = 14\ndr_high_db = 8\n");
        CHECK_THROWS_AS(load_genre_profiles(conf), ConfigError);
        testutil::write_file(conf, "[default]\nband_low = 0.5 0.5 0.5 0.5\n");
        CHECK_THROWS_AS(load_genre_profiles(conf), ConfigError);  // low >= high
        testutil::write_file(conf, "dr_low_db = 1\n");
        CHECK_THROWS_AS(load_genre_profiles(conf), ConfigError);  // key outside a section
        testutil::write_file(conf, "[default]\nmystery = 1\n");
        CHECK_THROWS_AS(load_genre_profiles(conf), ConfigError);
        CHECK_THROWS_AS(load_genre_profiles(tmp.path() / "missing.conf"), ConfigError);
    }
}

// ---------------------------------------------------------------------------
// stereo width
// ---------------------------------------------------------------------------

TEST_CASE("stereo width categories") {
    const Eigen::Index n = 96000;
    SUBCASE("identical channels are mono") {
        const ArrayXd x = testutil::uniform_noise(n, 0.5, 1);
        const auto r = stereo_width(testutil::stereo_buffer(x, x, 48000));
        CHECK(r.category == StereoCategory::mono);
        CHECK(r.ild_db == doctest::Approx(0.0));
        CHECK(r.side_mid_energy_ratio_db == -std::numeric_limits<double>::infinity());
    }
    SUBCASE("uncorrelated equal-power noise is wide") {
        const ArrayXd l = testutil::uniform_noise(n, 0.5, 2);
        const ArrayXd r = testutil::uniform_noise(n, 0.5, 3);
        const auto res = stereo_width(testutil::stereo_buffer(l, r, 48000));
        CHECK(res.category == StereoCategory::wide);
        CHECK(res.side_mid_energy_ratio_db == doctest::Approx(0.0).epsilon(0.5));
    }
    SUBCASE("a 1% channel difference is narrow") {
        const ArrayXd l = testutil::uniform_noise(n, 0.5, 4);
        const auto res = stereo_width(testutil::stereo_buffer(l, 0.99 * l, 48000));
        CHECK(res.category == StereoCategory::narrow);
        CHECK(res.side_mid_energy_ratio_db ==
              doctest::Approx(20.0 * std::log10(0.01 / 1.99)).epsilon(0.01));
    }
    SUBCASE("level difference shows up in the ILD") {
        const ArrayXd l = testutil::uniform_noise(n, 0.5, 5);
        const ArrayXd r = 0.5 * testutil::uniform_noise(n, 0.5, 6);
        const auto res = stereo_width(testutil::stereo_buffer(l, r, 48000));
        CHECK(res.ild_db == doctest::Approx(6.02).epsilon(0.05));
    }
    SUBCASE("mono input is rejected") {
        CHECK_THROWS_AS(stereo_width(testutil::mono_buffer(ArrayXd::Zero(n), 48000)), NotStereo);
    }
}

// ---------------------------------------------------------------------------
// mono compatibility
// ---------------------------------------------------------------------------

TEST_CASE("mono compatibility cases") {
    const Eigen::Index n = 96000;
    SUBCASE("identical channels fold down losslessly") {
        const ArrayXd x = testutil::uniform_noise(n, 0.5, 11);
        const auto r = mono_compatibility(testutil::stereo_buffer(x, x, 48000));
        CHECK(r.folddown_loss_db >= -0.01);
        CHECK(r.mid_side_correlation == 0.0);  // side has zero variance
        CHECK(r.compatible);
    }
    SUBCASE("anti-phase channels cancel entirely") {
        const ArrayXd x = testutil::uniform_noise(n, 0.5, 12);
        const auto r = mono_compatibility(testutil::stereo_buffer(x, -x, 48000));
        CHECK(r.folddown_loss_db == -std::numeric_limits<double>::infinity());
        CHECK_FALSE(r.compatible);
    }
    SUBCASE("independent noises lose ~3 dB and stay compatible") {
        const ArrayXd l = testutil::uniform_noise(n, 0.5, 13);
        const ArrayXd r = testutil::uniform_noise(n, 0.5, 14);
        const auto res = mono_compatibility(testutil::stereo_buffer(l, r, 48000));
        CHECK(res.folddown_loss_db == doctest::Approx(-3.01).epsilon(0.1));
        CHECK(std::abs(res.mid_side_correlation) < 0.1);
        CHECK(res.compatible);
    }
    SUBCASE("mono input is rejected") {
        CHECK_THROWS_AS(mono_compatibility(testutil::mono_buffer(ArrayXd::Zero(n), 48000)),
                        NotStereo);
    }
}

// ---------------------------------------------------------------------------
// phase issues
// ---------------------------------------------------------------------------

TEST_CASE("phase analysis cases") {
    const Eigen::Index n = 240000;  // 5 s at 48 kHz
    SUBCASE("identical channels read 0 rad") {
        const ArrayXd x = testutil::uniform_noise(n, 0.5, 21);
        const auto r = phase_issues(testutil::stereo_buffer(x, x, 48000));
        CHECK(r.mean_abs_phase_diff_rad == doctest::Approx(0.0).epsilon(1e-9));
        CHECK_FALSE(r.has_issue);
    }
    SUBCASE("polarity inversion reads pi and is flagged") {
        const ArrayXd x = testutil::uniform_noise(n, 0.5, 22);
        const auto r = phase_issues(testutil::stereo_buffer(x, -x, 48000));
        CHECK(r.mean_abs_phase_diff_rad == doctest::Approx(kPi).epsilon(1e-6));
        CHECK(r.has_issue);
    }
    SUBCASE("pure gain difference reads 0 rad") {
        const ArrayXd x = testutil::uniform_noise(n, 0.5, 23);
        const auto r = phase_issues(testutil::stereo_buffer(x, 0.5 * x, 48000));
        CHECK(r.mean_abs_phase_diff_rad == doctest::Approx(0.0).epsilon(1e-9));
        CHECK_FALSE(r.has_issue);
    }
    SUBCASE("mean lands between the per-bin offsets") {
        const auto b = phase_tone_pair({{64, 0.4}, {256, 1.2}}, n, 48000);
        const auto r = phase_issues(b);
        CHECK(r.mean_abs_phase_diff_rad > 0.3);
        CHECK(r.mean_abs_phase_diff_rad < 1.3);
        CHECK_FALSE(r.has_issue);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(phase_issues(testutil::mono_buffer(ArrayXd::Zero(n), 48000)), NotStereo);
        CHECK_THROWS_AS(
            phase_issues(testutil::stereo_buffer(ArrayXd::Zero(1000), ArrayXd::Zero(1000), 48000)),
            TooShort);
    }
    SUBCASE("silence has no qualifying bins and reads 0") {
        const auto r = phase_issues(testutil::stereo_buffer(ArrayXd::Zero(n), ArrayXd::Zero(n), 48000));
        CHECK(r.mean_abs_phase_diff_rad == 0.0);
        CHECK_FALSE(r.has_issue);
    }
}

// ---------------------------------------------------------------------------
// tonal profile
// ---------------------------------------------------------------------------

TEST_CASE("tonal profile of white noise follows the bandwidth proportions") {
    const ArrayXd x = testutil::uniform_noise(960000, 0.5, 41);  // 20 s at 48 kHz
    GenreProfileSet profiles;
    const auto t = tonal_profile(testutil::mono_buffer(x, 48000), "default", profiles);
    const double expected[4] = {230.0 / 19980.0, 1750.0 / 19980.0, 6000.0 / 19980.0,
                                12000.0 / 19980.0};
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(t.band_energy_fraction(i) - expected[i]) < 0.02);
    CHECK(t.band_energy_fraction.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // default thresholds classify the flat spectrum as low/low/medium/high
    CHECK(t.band_class[0] == BandClass::low);
    CHECK(t.band_class[1] == BandClass::low);
    CHECK(t.band_class[2] == BandClass::medium);
    CHECK(t.band_class[3] == BandClass::high);
}

TEST_CASE("single tones land in their band") {
    GenreProfileSet profiles;
    const auto low = tonal_profile(
        testutil::mono_buffer(testutil::sine(100.0, 48000, 1.0, 0.5), 48000), "default", profiles);
    CHECK(low.band_energy_fraction(0) >= 0.99);
    const auto mid = tonal_profile(
        testutil::mono_buffer(testutil::sine(5000.0, 48000, 1.0, 0.5), 48000), "default",
        profiles);
    CHECK(mid.band_energy_fraction(2) >= 0.99);
}

TEST_CASE("tonal profile needs one frame") {
    GenreProfileSet profiles;
    CHECK_THROWS_AS(
        tonal_profile(testutil::mono_buffer(ArrayXd::Zero(1000), 48000), "default", profiles),
        TooShort);
}

// ---------------------------------------------------------------------------
// cross-analyzer properties
// ---------------------------------------------------------------------------

TEST_CASE("gain scaling shifts level metrics and leaves shape metrics alone") {
    const Eigen::Index n = 96000;
    const ArrayXd l = testutil::uniform_noise(n, 0.5, 51);
    const ArrayXd r = testutil::uniform_noise(n, 0.5, 52);
    const AudioBuffer a = testutil::stereo_buffer(l, r, 48000);
    const double g = 0.7;
    const AudioBuffer b = testutil::stereo_buffer(g * l, g * r, 48000);
    const double gain_db = 20.0 * std::log10(g);

    const auto la = integrated_loudness(a), lb = integrated_loudness(b);
    REQUIRE(la.has_value());
    REQUIRE(lb.has_value());
    CHECK(*lb - *la == doctest::Approx(gain_db).epsilon(0.05));
    CHECK(true_peak(b) - true_peak(a) == doctest::Approx(gain_db).epsilon(0.05));

    CHECK(std::abs(dynamic_range(a) - dynamic_range(b)) < 1e-6);
    const auto ma = mono_compatibility(a), mb = mono_compatibility(b);
    CHECK(std::abs(ma.mid_side_correlation - mb.mid_side_correlation) < 1e-6);
    const auto sa = stereo_width(a), sb = stereo_width(b);
    CHECK(sa.category == sb.category);
    CHECK(std::abs(sa.side_mid_energy_ratio_db - sb.side_mid_energy_ratio_db) < 1e-6);

    GenreProfileSet profiles;
    const auto ta = tonal_profile(a, "default", profiles);
    const auto tb = tonal_profile(b, "default", profiles);
    CHECK((ta.band_energy_fraction - tb.band_energy_fraction).abs().maxCoeff() < 1e-6);

    // range invariants along the way
    const auto pa = phase_issues(a);
    CHECK(pa.mean_abs_phase_diff_rad >= 0.0);
    CHECK(pa.mean_abs_phase_diff_rad <= kPi);
    CHECK(ta.band_energy_fraction.minCoeff() >= 0.0);
    CHECK(ta.band_energy_fraction.maxCoeff() <= 1.0);
}

TEST_CASE("gain scaling leaves the phase statistic unchanged on tonal content") {
    const auto a = phase_tone_pair({{64, 0.3}, {200, 2.0}, {700, 1.0}}, 96000, 48000);
    AudioBuffer b = a;
    b.samples *= 0.6;
    const auto pa = phase_issues(a), pb = phase_issues(b);
    CHECK(std::abs(pa.mean_abs_phase_diff_rad - pb.mean_abs_phase_diff_rad) < 1e-6);
}

TEST_CASE("channel swap leaves every analyzer unchanged") {
    const Eigen::Index n = 96000;
    const ArrayXd l = testutil::uniform_noise(n, 0.6, 61);
    const ArrayXd r = 0.8 * testutil::uniform_noise(n, 0.6, 62);
    const AudioBuffer a = testutil::stereo_buffer(l, r, 48000);
    const AudioBuffer b = testutil::stereo_buffer(r, l, 48000);

    CHECK(*integrated_loudness(a) == doctest::Approx(*integrated_loudness(b)).epsilon(1e-9));
    CHECK(true_peak(a) == doctest::Approx(true_peak(b)).epsilon(1e-9));
    CHECK(detect_clipping(a).clipped_sample_count == detect_clipping(b).clipped_sample_count);
    const auto pa = phase_issues(a), pb = phase_issues(b);
    CHECK(pa.mean_abs_phase_diff_rad ==
          doctest::Approx(pb.mean_abs_phase_diff_rad).epsilon(1e-9));
    const auto ma = mono_compatibility(a), mb = mono_compatibility(b);
    CHECK(ma.folddown_loss_db == doctest::Approx(mb.folddown_loss_db).epsilon(1e-9));
    CHECK(ma.compatible == mb.compatible);
    const auto sa = stereo_width(a), sb = stereo_width(b);
    CHECK(sa.category == sb.category);
    CHECK(sa.ild_db == doctest::Approx(sb.ild_db).epsilon(1e-9));
}

TEST_CASE("polarity inversion of both channels changes nothing") {
    const Eigen::Index n = 96000;
    const ArrayXd l = testutil::uniform_noise(n, 0.6, 71);
    const ArrayXd r = testutil::uniform_noise(n, 0.6, 72);
    const AudioBuffer a = testutil::stereo_buffer(l, r, 48000);
    const AudioBuffer b = testutil::stereo_buffer(-l, -r, 48000);

    CHECK(*integrated_loudness(a) == doctest::Approx(*integrated_loudness(b)).epsilon(1e-9));
    CHECK(true_peak(a) == doctest::Approx(true_peak(b)).epsilon(1e-9));
    CHECK(detect_clipping(a).clipped_sample_count == detect_clipping(b).clipped_sample_count);
    CHECK(dynamic_range(a) == doctest::Approx(dynamic_range(b)).epsilon(1e-12));
    const auto pa = phase_issues(a), pb = phase_issues(b);
    CHECK(pa.mean_abs_phase_diff_rad ==
          doctest::Approx(pb.mean_abs_phase_diff_rad).epsilon(1e-9));
    const auto sa = stereo_width(a), sb = stereo_width(b);
    CHECK(sa.category == sb.category);
    const auto ma = mono_compatibility(a), mb = mono_compatibility(b);
    CHECK(ma.mid_side_correlation == doctest::Approx(mb.mid_side_correlation).epsilon(1e-9));
}

// ---------------------------------------------------------------------------
// analyze_track
// ---------------------------------------------------------------------------

TEST_CASE("analyze_track composes the analyzers") {
    AnalysisConfig config;
    FileMeta meta;
    meta.sample_rate = 48000;
    meta.bit_depth = 32;
    meta.channel_count = 2;
    meta.encoding = Encoding::pcm_float;

    SUBCASE("conformance sine as a mix") {
        const AudioBuffer b = conformance_sine(-23.0, 48000, 5.0);
        const auto r = analyze_track(b, meta, TrackKind::mix, "pop", config);
        REQUIRE(r.loudness.has_value());
        REQUIRE(r.loudness->integrated_lufs.has_value());
        CHECK(std::abs(*r.loudness->integrated_lufs - (-23.0)) < 0.1);
        CHECK(r.clipping->severity == ClippingSeverity::none);
        CHECK_FALSE(r.phase->has_issue);
        CHECK(r.issues == classify_issues(r, config.issues));
    }
    SUBCASE("a clean wide master has no issues") {
        const AudioBuffer b = nominal_master();
        const auto r = analyze_track(b, meta, TrackKind::master, "default", config);
        REQUIRE(r.loudness->integrated_lufs.has_value());
        CHECK(r.compression->verdict == CompressionVerdict::optimal);
        CHECK(r.stereo->category == StereoCategory::wide);
        CHECK(r.mono_compat->compatible);
        CHECK_FALSE(r.phase->has_issue);
        CHECK(r.issues.empty());
    }
    SUBCASE("silence is flagged too quiet, other analyzers still run") {
        const AudioBuffer b =
            testutil::stereo_buffer(ArrayXd::Zero(240000), ArrayXd::Zero(240000), 48000);
        const auto r = analyze_track(b, meta, TrackKind::mix, "default", config);
        REQUIRE(r.loudness.has_value());
        CHECK_FALSE(r.loudness->integrated_lufs.has_value());
        CHECK(r.issues.count(IssueKind::too_quiet) == 1);
        CHECK(r.clipping->severity == ClippingSeverity::none);
        CHECK(r.skipped.count("compression") == 1);  // silent input has no crest factor
    }
    SUBCASE("clipped anti-phase noise collects the expected flags") {
        const Eigen::Index n = 240000;
        const ArrayXd l = (1.1 * testutil::uniform_noise(n, 1.0, 81)).min(1.0).max(-1.0);
        const AudioBuffer b = testutil::stereo_buffer(l, -l, 48000);
        const auto r = analyze_track(b, meta, TrackKind::master, "default", config);
        CHECK(r.issues.count(IssueKind::clipping) == 1);
        CHECK(r.issues.count(IssueKind::phase_issues) == 1);
        CHECK(r.issues.count(IssueKind::lack_of_mono_compatibility) == 1);
    }
    SUBCASE("mono input skips the stereo-only analyzers") {
        const AudioBuffer b =
            testutil::mono_buffer(testutil::uniform_noise(96000, 0.3, 91), 48000);
        const auto r = analyze_track(b, meta, TrackKind::mix, "default", config);
        CHECK_FALSE(r.stereo.has_value());
        CHECK_FALSE(r.mono_compat.has_value());
        CHECK_FALSE(r.phase.has_value());
        CHECK(r.skipped.count("stereo_width") == 1);
        CHECK(r.skipped.count("phase") == 1);
        CHECK(r.loudness.has_value());
        CHECK(r.tonal.has_value());
    }
}
