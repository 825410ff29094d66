#pragma once

#include <optional>
#include <string>

#include "mixqa/analysis_results.hpp"
#include "mixqa/audio_io.hpp"
#include "mixqa/report.hpp"

namespace mixqa {

/// Gated integrated loudness per the two-stage K-weighted measurement:
/// 400 ms blocks with 75% overlap, absolute gate at -70 LUFS, relative gate
/// 10 LU under the ungated mean. Returns empty when every block is gated.
/// Throws TooShort for input under 400 ms.
std::optional<double> integrated_loudness(const AudioBuffer& buffer);

/// Peak of the 4x-oversampled signal in dBTP; -infinity for silence.
double true_peak(const AudioBuffer& buffer);

/// Count samples at or beyond full scale (threshold 1 - 2^-15 so that
/// normalized integer full scale counts). Severity: none at 0, major above
/// 10000, minor otherwise.
ClippingReport detect_clipping(const AudioBuffer& buffer);

/// Crest-factor dynamic range over all channels pooled:
/// 20*log10(max|x| / mean|x|). Throws SilentInput when the mean is zero.
double dynamic_range(const AudioBuffer& buffer);

/// Compare a dynamic-range figure against the genre's target band.
/// Unknown genres fall back to the "default" profile.
CompressionResult classify_compression(double dynamic_range_db, const std::string& genre,
                                       const GenreProfileSet& profiles);

/// Inter-channel level difference over gated 400 ms blocks plus the
/// side/mid energy ratio that drives the width category. Throws NotStereo.
StereoResult stereo_width(const AudioBuffer& buffer, const StereoThresholds& thresholds = {});

/// Mid/side correlation and mono fold-down energy loss. Throws NotStereo.
MonoCompatResult mono_compatibility(const AudioBuffer& buffer,
                                    const MonoCompatThresholds& thresholds = {});

/// Mean absolute L/R phase difference over STFT bins in 20 Hz - 20 kHz where
/// both channels are above the amplitude gate. Throws NotStereo / TooShort.
PhaseResult phase_issues(const AudioBuffer& buffer, const PhaseThresholds& thresholds = {});

/// Share of spectral energy in each analysis band, classified against the
/// genre's per-band thresholds. Throws TooShort for input under one frame.
TonalProfile tonal_profile(const AudioBuffer& buffer, const std::string& genre,
                           const GenreProfileSet& profiles);

/// Everything analyze_track needs beyond the audio itself.
struct AnalysisConfig {
    GenreProfileSet profiles;
    StereoThresholds stereo;
    MonoCompatThresholds mono_compat;
    PhaseThresholds phase;
    IssueThresholds issues;
};

/// Run every analyzer on one track and classify the findings. Stereo-only
/// analyzers are skipped for mono input and analyzer errors are recorded per
/// field without aborting the rest. Deterministic for identical input.
AnalysisReport analyze_track(const AudioBuffer& buffer, const FileMeta& meta, TrackKind kind,
                             const std::string& genre, const AnalysisConfig& config);

} // namespace mixqa
