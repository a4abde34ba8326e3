#include "lectern/qa/wav.hpp"

#include <cstring>

#include <fmt/format.h>

#include "lectern/errors.hpp"

namespace lectern::qa {

namespace {

std::uint32_t le32(std::string_view b, std::size_t at) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
           static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t le16(std::string_view b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      static_cast<unsigned char>(b[at + 1]) << 8);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

PcmAudio decode_wav(std::string_view bytes) {
    if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
        throw FormatError("audio is not a RIFF/WAVE file");
    }
    PcmAudio audio;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string_view id = bytes.substr(pos, 4);
        const std::uint32_t size = le32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) {
            throw FormatError(fmt::format("WAV chunk '{}' claims {} bytes but only {} remain", id, size,
                                          bytes.size() - body));
        }
        if (id == "fmt ") {
            if (size < 16) throw FormatError("WAV fmt chunk too short");
            const auto format = le16(bytes, body);
            audio.channels = le16(bytes, body + 2);
            audio.sample_rate = static_cast<int>(le32(bytes, body + 4));
            const auto bits = le16(bytes, body + 14);
            if (format != 1) throw FormatError(fmt::format("WAV encoding {} is not PCM", format));
            if (bits != 16) throw FormatError(fmt::format("WAV has {} bits per sample, expected 16", bits));
            if (audio.channels == 0 || audio.sample_rate <= 0) throw FormatError("WAV fmt chunk is inconsistent");
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw FormatError("WAV data chunk precedes fmt chunk");
            audio.samples.resize(size / 2);
            for (std::size_t i = 0; i < audio.samples.size(); ++i) {
                audio.samples[i] = static_cast<std::int16_t>(le16(bytes, body + 2 * i));
            }
            return audio;
        }
        pos = body + size + (size & 1u);
    }
    throw FormatError(have_fmt ? "WAV file has no data chunk" : "WAV file has no fmt chunk");
}

PcmAudio decode_voice_query(std::string_view bytes) {
    auto audio = decode_wav(bytes);
    if (audio.sample_rate != 16000 || audio.channels != 1) {
        throw FormatError(fmt::format("voice query must be 16 kHz mono, got {} Hz x {} channels",
                                      audio.sample_rate, audio.channels));
    }
    return audio;
}

std::vector<std::uint8_t> encode_wav(const PcmAudio& audio) {
    std::vector<std::uint8_t> out;
    const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put32(out, 16);
    put16(out, 1);
    put16(out, static_cast<std::uint16_t>(audio.channels));
    put32(out, static_cast<std::uint32_t>(audio.sample_rate));
    put32(out, static_cast<std::uint32_t>(audio.sample_rate * audio.channels * 2));
    put16(out, static_cast<std::uint16_t>(audio.channels * 2));
    put16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put32(out, data_bytes);
    for (auto s : audio.samples) put16(out, static_cast<std::uint16_t>(s));
    return out;
}

}  // namespace lectern::qa
