#include "asc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "asc/errors.hpp"

namespace asc {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
    return std::uint16_t(p[0] | (p[1] << 8));
}

[[noreturn]] void decode_fail(const std::string& path, std::size_t offset,
                              const std::string& what) {
    throw IoError("wav decode error in " + path + " at offset " +
                  std::to_string(offset) + ": " + what);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    if (buf.size() < 12) decode_fail(path, 0, "file shorter than RIFF header");
    if (std::memcmp(buf.data(), "RIFF", 4) != 0) decode_fail(path, 0, "missing RIFF tag");
    if (std::memcmp(buf.data() + 8, "WAVE", 4) != 0) decode_fail(path, 8, "missing WAVE tag");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::uint32_t data_len = 0;
    std::size_t data_offset = 0;

    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const unsigned char* hdr = buf.data() + pos;
        std::uint32_t chunk_len = rd_u32(hdr + 4);
        std::size_t body = pos + 8;
        if (body + chunk_len > buf.size())
            decode_fail(path, pos, "chunk overruns file");
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_len < 16) decode_fail(path, pos, "fmt chunk too short");
            format = rd_u16(buf.data() + body);
            channels = rd_u16(buf.data() + body + 2);
            sample_rate = rd_u32(buf.data() + body + 4);
            bits = rd_u16(buf.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = buf.data() + body;
            data_len = chunk_len;
            data_offset = body;
        }
        pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt) decode_fail(path, buf.size(), "no fmt chunk");
    if (!data) decode_fail(path, buf.size(), "no data chunk");
    if (channels != 1)
        throw ValidationError("unsupported format in " + path + ": " +
                              std::to_string(channels) + " channels, need mono");
    if (sample_rate == 0) decode_fail(path, data_offset, "zero sample rate");
    if (data_len == 0) decode_fail(path, data_offset, "empty data chunk");

    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.id = std::filesystem::path(path).stem().string();

    if (format == 1 && bits == 16) {
        std::size_t n = data_len / 2;
        clip.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::int16_t v = static_cast<std::int16_t>(rd_u16(data + 2 * i));
            clip.samples[i] = static_cast<float>(v) / 32768.0f;
        }
    } else if (format == 3 && bits == 32) {
        std::size_t n = data_len / 4;
        clip.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t raw = rd_u32(data + 4 * i);
            float v;
            std::memcpy(&v, &raw, 4);
            if (!std::isfinite(v))
                decode_fail(path, data_offset + 4 * i, "non-finite sample");
            clip.samples[i] = std::clamp(v, -1.0f, 1.0f);
        }
    } else {
        throw ValidationError("unsupported format in " + path + ": format tag " +
                              std::to_string(format) + ", " + std::to_string(bits) +
                              " bits (need PCM16 or float32)");
    }

    if (clip.samples.empty()) decode_fail(path, data_offset, "no samples decoded");
    return clip;
}

void write_wav_pcm16(const std::string& path, const std::vector<float>& samples,
                     std::uint32_t sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    auto w_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto w_u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff)};
        out.write(reinterpret_cast<char*>(b), 2);
    };

    std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    w_u32(36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    w_u32(16);
    w_u16(1);  // PCM
    w_u16(1);  // mono
    w_u32(sample_rate);
    w_u32(sample_rate * 2);
    w_u16(2);
    w_u16(16);
    out.write("data", 4);
    w_u32(data_len);
    for (float s : samples) {
        float c = std::clamp(s, -1.0f, 1.0f);
        // scale by 32768 to mirror the reader's /32768; clamp the one
        // unrepresentable code at +1.0
        long q = std::lrintf(c * 32768.0f);
        auto v = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
        w_u16(static_cast<std::uint16_t>(v));
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace asc
