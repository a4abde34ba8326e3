#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace lectern::qa {

struct PcmAudio {
    int sample_rate = 0;
    int channels = 0;
    std::vector<std::int16_t> samples;  // interleaved

    double duration_seconds() const {
        return sample_rate > 0 && channels > 0
                   ? static_cast<double>(samples.size()) / (sample_rate * channels)
                   : 0.0;
    }
};

/// Decode a RIFF/WAVE file holding 16-bit PCM. Throws FormatError on
/// truncated headers, non-PCM encodings or inconsistent chunk sizes.
PcmAudio decode_wav(std::string_view bytes);

/// Voice queries must be 16 kHz mono 16-bit PCM.
PcmAudio decode_voice_query(std::string_view bytes);

/// 16-bit PCM WAV writer (used by the stub synthesizer and tests).
std::vector<std::uint8_t> encode_wav(const PcmAudio& audio);

}  // namespace lectern::qa
