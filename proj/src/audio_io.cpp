#include "mixqa/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace mixqa {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
    std::uint16_t block_align = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnsupportedFormat("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

double decode_sample(const std::uint8_t* p, int bits, bool is_float) {
    if (is_float) {
        float v;
        std::memcpy(&v, p, 4);
        return static_cast<double>(v);
    }
    switch (bits) {
        case 16: {
            auto v = static_cast<std::int16_t>(read_u16(p));
            return v / 32768.0;
        }
        case 24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
            return v / 8388608.0;
        }
        case 32: {
            auto v = static_cast<std::int32_t>(read_u32(p));
            return v / 2147483648.0;
        }
        default:
            return 0.0;
    }
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::int32_t clamp_scale(double x, double scale, std::int64_t lo, std::int64_t hi) {
    auto v = static_cast<std::int64_t>(std::llround(x * scale));
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(v, lo, hi));
}

} // namespace

std::pair<AudioBuffer, FileMeta> decode_audio(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw UnsupportedFormat("not a RIFF/WAVE file: " + path.string());
    }

    FmtChunk fmt;
    bool have_fmt = false;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t size = read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;

        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16 || body + size > bytes.size())
                throw CorruptFile("fmt chunk truncated: " + path.string());
            const std::uint8_t* p = bytes.data() + body;
            fmt.format = read_u16(p);
            fmt.channels = read_u16(p + 2);
            fmt.sample_rate = read_u32(p + 4);
            fmt.block_align = read_u16(p + 12);
            fmt.bits_per_sample = read_u16(p + 14);
            if (fmt.format == kFormatExtensible) {
                // format code lives in the first two bytes of the SubFormat GUID
                if (size < 40) throw CorruptFile("extensible fmt chunk truncated");
                fmt.format = read_u16(p + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (body + size > bytes.size())
                throw CorruptFile("data chunk truncated: declares " + std::to_string(size) +
                                  " bytes past end of file");
            data = bytes.data() + body;
            data_size = size;
        }
        pos = body + size + (size & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr)
        throw CorruptFile("missing fmt or data chunk: " + path.string());
    if (fmt.format != kFormatPcm && fmt.format != kFormatFloat)
        throw UnsupportedFormat("compressed or unknown codec (format tag " +
                                std::to_string(fmt.format) + ")");
    if (fmt.channels < 1 || fmt.channels > 2)
        throw UnsupportedFormat(std::to_string(fmt.channels) + " channels (only 1-2 supported)");
    if (fmt.sample_rate == 0) throw CorruptFile("zero sample rate in header");

    const bool is_float = fmt.format == kFormatFloat;
    if (is_float && fmt.bits_per_sample != 32)
        throw UnsupportedFormat("float PCM must be 32-bit");
    if (!is_float && fmt.bits_per_sample != 16 && fmt.bits_per_sample != 24 &&
        fmt.bits_per_sample != 32)
        throw UnsupportedFormat(std::to_string(fmt.bits_per_sample) +
                                "-bit integer PCM not supported (16/24/32 only)");

    const std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
    const std::size_t frame_size = bytes_per_sample * fmt.channels;
    if (fmt.block_align != 0 && fmt.block_align != frame_size)
        throw CorruptFile("block align disagrees with sample format");
    if (data_size % frame_size != 0)
        throw CorruptFile("data chunk holds a partial frame");

    const auto frames = static_cast<Eigen::Index>(data_size / frame_size);
    AudioBuffer buffer;
    buffer.sample_rate = static_cast<int>(fmt.sample_rate);
    buffer.samples.resize(frames, fmt.channels);
    for (Eigen::Index i = 0; i < frames; ++i) {
        const std::uint8_t* frame = data + static_cast<std::size_t>(i) * frame_size;
        for (int c = 0; c < fmt.channels; ++c) {
            buffer.samples(i, c) =
                decode_sample(frame + c * bytes_per_sample, fmt.bits_per_sample, is_float);
        }
    }

    FileMeta meta;
    meta.sample_rate = static_cast<int>(fmt.sample_rate);
    meta.bit_depth = fmt.bits_per_sample;
    meta.channel_count = fmt.channels;
    meta.duration_seconds = static_cast<double>(frames) / fmt.sample_rate;
    meta.encoding = is_float ? Encoding::pcm_float : Encoding::pcm_int;
    return {std::move(buffer), meta};
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> to_mid_side(const AudioBuffer& buffer) {
    if (!buffer.is_stereo())
        throw NotStereo("mid/side needs a stereo buffer, got " +
                        std::to_string(buffer.channel_count()) + " channel(s)");
    Eigen::ArrayXd mid = (buffer.samples.col(0) + buffer.samples.col(1)) / 2.0;
    Eigen::ArrayXd side = (buffer.samples.col(0) - buffer.samples.col(1)) / 2.0;
    return {std::move(mid), std::move(side)};
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavSampleFormat format) {
    const auto frames = buffer.length();
    const auto channels = static_cast<int>(buffer.channel_count());
    int bits = 16;
    bool is_float = false;
    switch (format) {
        case WavSampleFormat::int16: bits = 16; break;
        case WavSampleFormat::int24: bits = 24; break;
        case WavSampleFormat::int32: bits = 32; break;
        case WavSampleFormat::float32: bits = 32; is_float = true; break;
    }
    const std::uint32_t bytes_per_sample = bits / 8;
    const std::uint32_t frame_size = bytes_per_sample * channels;
    const std::uint32_t data_size = static_cast<std::uint32_t>(frames) * frame_size;

    std::vector<std::uint8_t> out;
    out.reserve(64 + data_size);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    const std::uint32_t fact_size = is_float ? 12 : 0;
    append_u32(out, 4 + (8 + 16) + fact_size + 8 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});

    out.insert(out.end(), {'f', 'm', 't', ' '});
    append_u32(out, 16);
    append_u16(out, is_float ? kFormatFloat : kFormatPcm);
    append_u16(out, static_cast<std::uint16_t>(channels));
    append_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
    append_u32(out, static_cast<std::uint32_t>(buffer.sample_rate) * frame_size);
    append_u16(out, static_cast<std::uint16_t>(frame_size));
    append_u16(out, static_cast<std::uint16_t>(bits));

    if (is_float) {
        out.insert(out.end(), {'f', 'a', 'c', 't'});
        append_u32(out, 4);
        append_u32(out, static_cast<std::uint32_t>(frames));
    }

    out.insert(out.end(), {'d', 'a', 't', 'a'});
    append_u32(out, data_size);
    for (Eigen::Index i = 0; i < frames; ++i) {
        for (int c = 0; c < channels; ++c) {
            const double x = buffer.samples(i, c);
            if (is_float) {
                const float v = static_cast<float>(x);
                std::uint32_t u;
                std::memcpy(&u, &v, 4);
                append_u32(out, u);
            } else if (bits == 16) {
                append_u16(out, static_cast<std::uint16_t>(
                                    clamp_scale(x, 32768.0, -32768, 32767)));
            } else if (bits == 24) {
                const std::int32_t v = clamp_scale(x, 8388608.0, -8388608, 8388607);
                out.push_back(static_cast<std::uint8_t>(v & 0xFF));
                out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
                out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
            } else {
                append_u32(out, static_cast<std::uint32_t>(
                                    clamp_scale(x, 2147483648.0, -2147483648LL, 2147483647LL)));
            }
        }
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

} // namespace mixqa
