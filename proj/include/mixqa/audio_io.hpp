#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <utility>

#include "mixqa/errors.hpp"

namespace mixqa {

/// Deinterleaved sample data, one column per channel, full scale = +-1.0.
/// Integer-PCM sources are normalized on decode; float sources may carry
/// values outside +-1.0 (they signal clipping and are preserved).
struct AudioBuffer {
    Eigen::ArrayXXd samples;   // length x channels
    int sample_rate = 0;       // Hz

    Eigen::Index length() const { return samples.rows(); }
    Eigen::Index channel_count() const { return samples.cols(); }
    bool is_stereo() const { return samples.cols() == 2; }
    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.rows()) / sample_rate : 0.0;
    }
    auto channel(Eigen::Index c) const { return samples.col(c); }
};

enum class Encoding { pcm_int, pcm_float };

/// Container-level facts, taken from the WAV header verbatim.
struct FileMeta {
    int sample_rate = 0;
    int bit_depth = 0;
    int channel_count = 0;
    double duration_seconds = 0.0;
    Encoding encoding = Encoding::pcm_int;
};

/// Decode a RIFF/WAVE file holding 16/24/32-bit integer or 32-bit float PCM,
/// 1-2 channels. Integer samples are divided by 2^(bits-1); float samples
/// pass through unmodified.
/// Throws UnsupportedFormat or CorruptFile.
std::pair<AudioBuffer, FileMeta> decode_audio(const std::filesystem::path& path);

/// mid = (L+R)/2, side = (L-R)/2. Throws NotStereo for mono input.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> to_mid_side(const AudioBuffer& buffer);

enum class WavSampleFormat { int16, int24, int32, float32 };

/// Write a canonical little-endian WAV file. Integer formats clamp to full
/// scale after scaling by 2^(bits-1); float32 writes samples untouched.
void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavSampleFormat format = WavSampleFormat::int16);

} // namespace mixqa
