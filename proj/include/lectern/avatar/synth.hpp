#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lectern/util/http_transport.hpp"

namespace lectern::avatar {

struct SynthRequest {
    std::string session_id;
    std::size_t seq = 0;
    std::string text;
};

struct SynthResult {
    std::string media_ref;                 // local path of the playable clip
    double duration = 0.0;                 // seconds
    std::vector<std::string> temp_files;   // extra adapter outputs to delete at cleanup
    std::optional<double> tts_seconds;     // per-stage timings when the adapter reports them
    std::optional<double> avatar_seconds;
};

/// Text -> talking-head clip. Failures throw.
class Synthesizer {
public:
    virtual ~Synthesizer() = default;

    virtual std::string name() const = 0;
    virtual SynthResult synthesize(const SynthRequest& req) = 0;
    /// Expected synthesis latency in seconds; simulations use it as the
    /// time a request takes on the virtual clock.
    virtual std::optional<double> latency_hint(const SynthRequest&) const { return std::nullopt; }
    virtual std::string health() const { return "ok"; }
};

/// `<temp_root>/alive/<session_id>`
std::filesystem::path session_dir(const std::filesystem::path& temp_root, const std::string& session_id);

/// `<session dir>/seg_<seq>.mp4`
std::filesystem::path segment_media_path(const std::filesystem::path& temp_root, const std::string& session_id,
                                         std::size_t seq);

inline constexpr double kStubSecondsPerChar = 0.06;

/// Writes a silent placeholder clip (an ISO-BMFF ftyp box followed by an
/// mdat box holding a silent 16 kHz WAV) whose duration is
/// kStubSecondsPerChar x character count.
class StubSynthesizer final : public Synthesizer {
public:
    explicit StubSynthesizer(std::filesystem::path temp_root, std::optional<double> latency_hint = std::nullopt);

    std::string name() const override { return "stub-silent"; }
    SynthResult synthesize(const SynthRequest& req) override;
    std::optional<double> latency_hint(const SynthRequest&) const override { return latency_hint_; }

private:
    std::filesystem::path root_;
    std::optional<double> latency_hint_;
};

/// POST {"text": "..."} -> {"media_url": "...", "duration": s}. The clip is
/// copied (file path or file:// URL) or downloaded (http URL) into the
/// session directory; a local source file is also registered for cleanup.
class HttpSynthesizer final : public Synthesizer {
public:
    HttpSynthesizer(Endpoint endpoint, std::filesystem::path temp_root, std::chrono::milliseconds timeout);

    std::string name() const override { return "http:" + endpoint_.authority(); }
    SynthResult synthesize(const SynthRequest& req) override;
    std::string health() const override { return probe(endpoint_); }

private:
    Endpoint endpoint_;
    std::filesystem::path root_;
    HttpOptions opts_;
};

/// Placeholder clip bytes for `duration` seconds of silence.
std::string placeholder_clip(double duration);

}  // namespace lectern::avatar
