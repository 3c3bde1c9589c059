#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "accforge/errors.hpp"

namespace accforge {

// Decoded mono waveform. Amplitudes are nominally in [-1, 1]; nothing in the
// pipeline normalizes, so mixing stays exactly linear and clipping is dealt
// with (and counted) only when encoding to PCM-16.
struct AudioClip {
    uint32_t sample_rate = 0;
    std::vector<float> samples;
    std::string source_id;

    [[nodiscard]] double duration_seconds() const {
        return sample_rate == 0 ? 0.0
                                : static_cast<double>(samples.size()) / sample_rate;
    }
};

// Deterministic mixing parameters. resolved_gain is the scalar actually
// applied to the event; snr_db records where it came from.
struct MixParams {
    double offset_seconds = 0.0;
    double snr_db = 0.0;
    double resolved_gain = 1.0;
};

struct EncodedWav {
    std::vector<uint8_t> bytes;   // complete RIFF/WAVE file image
    size_t clipped_samples = 0;   // inputs strictly outside [-1, 1]
};

namespace wav_detail {

inline uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

inline void put_tag(std::vector<uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

}  // namespace wav_detail

// Reads a RIFF/WAVE file: PCM-16/24/32 or IEEE float-32, 1 or 2 channels.
// Stereo is averaged to mono; integer formats are scaled to [-1, 1] by the
// respective power of two (16384 at 16 bit decodes to exactly 0.5).
inline AudioClip load_wav(const std::filesystem::path& path) {
    using namespace wav_detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<uint8_t> file((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());

    const std::string name = path.string();
    if (file.size() < 12 || std::memcmp(file.data(), "RIFF", 4) != 0 ||
        std::memcmp(file.data() + 8, "WAVE", 4) != 0) {
        raise(ErrorCode::CorruptFile, name + ": not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    const uint8_t* data = nullptr;
    uint32_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= file.size()) {
        const uint8_t* chunk = file.data() + pos;
        const uint32_t chunk_size = read_u32(chunk + 4);
        pos += 8;
        if (pos + chunk_size > file.size()) {
            raise(ErrorCode::CorruptFile, name + ": truncated chunk");
        }
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) raise(ErrorCode::CorruptFile, name + ": short fmt chunk");
            format = read_u16(file.data() + pos);
            channels = read_u16(file.data() + pos + 2);
            rate = read_u32(file.data() + pos + 4);
            bits = read_u16(file.data() + pos + 14);
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = file.data() + pos;
            data_size = chunk_size;
        }
        pos += chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }
    if (pos != file.size()) raise(ErrorCode::CorruptFile, name + ": trailing garbage");
    if (!have_fmt || data == nullptr) {
        raise(ErrorCode::CorruptFile, name + ": missing fmt or data chunk");
    }
    if (rate == 0) raise(ErrorCode::CorruptFile, name + ": zero sample rate");
    if (channels != 1 && channels != 2) {
        raise(ErrorCode::UnsupportedFormat,
              name + ": " + std::to_string(channels) + " channels");
    }
    const bool pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
    const bool flt = format == kFormatIeeeFloat && bits == 32;
    if (!pcm && !flt) {
        raise(ErrorCode::UnsupportedFormat,
              name + ": format " + std::to_string(format) + " at " +
                  std::to_string(bits) + " bit");
    }

    const size_t bytes_per_sample = bits / 8;
    const size_t frame_size = bytes_per_sample * channels;
    if (data_size % frame_size != 0) {
        raise(ErrorCode::CorruptFile, name + ": data chunk not frame-aligned");
    }
    const size_t frames = data_size / frame_size;

    AudioClip clip;
    clip.sample_rate = rate;
    clip.source_id = name;
    clip.samples.resize(frames);
    for (size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (uint16_t ch = 0; ch < channels; ++ch) {
            const uint8_t* p = data + (i * channels + ch) * bytes_per_sample;
            if (flt) {
                float v;
                std::memcpy(&v, p, 4);
                acc += v;
            } else if (bits == 16) {
                const auto v = static_cast<int16_t>(read_u16(p));
                acc += v / 32768.0;
            } else if (bits == 24) {
                int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
                if (v & 0x800000) v |= ~0xffffff;  // sign extend
                acc += v / 8388608.0;
            } else {
                const auto v = static_cast<int32_t>(read_u32(p));
                acc += v / 2147483648.0;
            }
        }
        clip.samples[i] = static_cast<float>(acc / channels);
    }
    for (float s : clip.samples) {
        if (!std::isfinite(s)) raise(ErrorCode::CorruptFile, name + ": non-finite sample");
    }
    return clip;
}

// PCM-16 little-endian encoding of the whole file image. Quantization is
// round(x * 32768) clamped to int16; inputs strictly outside [-1, 1] are
// counted as clipped. Round trip error is at most 1/32768 per sample.
inline EncodedWav encode_wav_pcm16(const AudioClip& clip) {
    using namespace wav_detail;
    if (clip.sample_rate == 0) raise(ErrorCode::InvalidArgument, "sample_rate must be > 0");

    const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * 2);
    EncodedWav out;
    out.bytes.reserve(44 + data_size);
    put_tag(out.bytes, "RIFF");
    put_u32(out.bytes, 36 + data_size);
    put_tag(out.bytes, "WAVE");
    put_tag(out.bytes, "fmt ");
    put_u32(out.bytes, 16);
    put_u16(out.bytes, kFormatPcm);
    put_u16(out.bytes, 1);  // mono
    put_u32(out.bytes, clip.sample_rate);
    put_u32(out.bytes, clip.sample_rate * 2);
    put_u16(out.bytes, 2);
    put_u16(out.bytes, 16);
    put_tag(out.bytes, "data");
    put_u32(out.bytes, data_size);

    for (float s : clip.samples) {
        if (!std::isfinite(s)) raise(ErrorCode::InvalidArgument, "non-finite sample");
        const double x = s;
        if (x > 1.0 || x < -1.0) ++out.clipped_samples;
        long q = std::lround(std::clamp(x, -1.0, 1.0) * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        put_u16(out.bytes, static_cast<uint16_t>(static_cast<int16_t>(q)));
    }
    return out;
}

// Writes clip as PCM-16 WAV; returns the number of hard-clipped samples.
inline size_t save_wav(const AudioClip& clip, const std::filesystem::path& path) {
    const EncodedWav encoded = encode_wav_pcm16(clip);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(encoded.bytes.data()),
              static_cast<std::streamsize>(encoded.bytes.size()));
    if (!out) raise(ErrorCode::IoError, "write failed: " + path.string());
    return encoded.clipped_samples;
}

// Linear-interpolation resample with end-hold past the last source sample.
// Output length is round(len * target/source); equal rates are the exact
// identity.
inline AudioClip resample(const AudioClip& clip, uint32_t target_rate) {
    if (target_rate == 0) raise(ErrorCode::InvalidArgument, "target_rate must be > 0");
    if (clip.sample_rate == 0) raise(ErrorCode::InvalidArgument, "sample_rate must be > 0");
    if (target_rate == clip.sample_rate) return clip;

    AudioClip out;
    out.sample_rate = target_rate;
    out.source_id = clip.source_id;
    if (clip.samples.empty()) return out;

    const size_t n = clip.samples.size();
    const auto out_len = static_cast<size_t>(std::llround(
        static_cast<double>(n) * target_rate / clip.sample_rate));
    const double step = static_cast<double>(clip.sample_rate) / target_rate;
    out.samples.resize(out_len);
    for (size_t i = 0; i < out_len; ++i) {
        const double pos = i * step;
        const auto idx = static_cast<size_t>(pos);
        if (idx + 1 >= n) {
            out.samples[i] = clip.samples[n - 1];
        } else {
            const double frac = pos - static_cast<double>(idx);
            out.samples[i] = static_cast<float>(clip.samples[idx] * (1.0 - frac) +
                                                clip.samples[idx + 1] * frac);
        }
    }
    return out;
}

inline double rms(const AudioClip& clip) {
    if (clip.samples.empty()) raise(ErrorCode::EmptyClip, "rms of empty clip");
    double acc = 0.0;
    for (float s : clip.samples) acc += static_cast<double>(s) * s;
    return std::sqrt(acc / static_cast<double>(clip.samples.size()));
}

// Gain g such that 20*log10(rms(base) / (g * rms(event))) == snr_db.
inline double gain_for_snr(const AudioClip& base, const AudioClip& event, double snr_db) {
    const double base_rms = rms(base);
    const double event_rms = rms(event);
    if (base_rms == 0.0 || event_rms == 0.0) {
        raise(ErrorCode::SilentInput, "gain_for_snr requires non-silent base and event");
    }
    return base_rms / event_rms * std::pow(10.0, -snr_db / 20.0);
}

// out[i] = base[i] + g * event[i - offset]; the event term is zero outside
// its support and the output extends to fit an overhanging event. No
// normalization happens here.
inline AudioClip mix(const AudioClip& base, const AudioClip& event, const MixParams& params) {
    if (base.sample_rate != event.sample_rate) {
        raise(ErrorCode::SampleRateMismatch,
              std::to_string(base.sample_rate) + " vs " + std::to_string(event.sample_rate));
    }
    if (params.offset_seconds < 0.0 || params.offset_seconds > base.duration_seconds()) {
        raise(ErrorCode::OffsetOutOfRange,
              "offset " + std::to_string(params.offset_seconds) + "s outside [0, " +
                  std::to_string(base.duration_seconds()) + "s]");
    }
    if (!(params.resolved_gain > 0.0) || !std::isfinite(params.resolved_gain)) {
        raise(ErrorCode::InvalidArgument, "resolved_gain must be positive and finite");
    }

    const auto offset = static_cast<size_t>(
        std::llround(params.offset_seconds * base.sample_rate));
    const size_t out_len = std::max(base.samples.size(), offset + event.samples.size());

    AudioClip out;
    out.sample_rate = base.sample_rate;
    out.source_id = base.source_id;
    out.samples.resize(out_len, 0.0f);
    std::copy(base.samples.begin(), base.samples.end(), out.samples.begin());
    for (size_t j = 0; j < event.samples.size(); ++j) {
        const size_t i = offset + j;
        out.samples[i] = static_cast<float>(
            static_cast<double>(out.samples[i]) +
            params.resolved_gain * static_cast<double>(event.samples[j]));
    }
    return out;
}

}  // namespace accforge
