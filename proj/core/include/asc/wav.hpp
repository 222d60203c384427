#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace asc {

/// One decoded mono recording. Samples are normalized to [-1, 1].
struct AudioClip {
    std::vector<float> samples;
    std::uint32_t sample_rate = 0;
    std::string id;
};

/// Reads a RIFF/WAVE file. Accepts mono PCM 16-bit or IEEE float 32-bit
/// only; anything else is rejected (no silent downmix or conversion).
/// Integer PCM is mapped to [-1, 1] by division by 32768.
AudioClip read_wav(const std::string& path);

/// Writes a mono PCM 16-bit file. Samples are clamped to [-1, 1] and
/// scaled by 32767.
void write_wav_pcm16(const std::string& path, const std::vector<float>& samples,
                     std::uint32_t sample_rate);

}  // namespace asc
