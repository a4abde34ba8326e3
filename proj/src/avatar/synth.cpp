#include "lectern/avatar/synth.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "lectern/errors.hpp"
#include "lectern/qa/wav.hpp"

namespace lectern::avatar {

namespace fs = std::filesystem;

namespace {

void append_box_header(std::string& out, std::uint32_t size, const char* type) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((size >> shift) & 0xff));
    out.append(type, 4);
}

void write_file(const fs::path& p, const std::string& bytes, const std::string& stage) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw AdapterError(stage, "cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw AdapterError(stage, "short write to " + p.string());
}

bool valid_session_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-' || c == '_';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

fs::path session_dir(const fs::path& temp_root, const std::string& session_id) {
    if (!valid_session_id(session_id)) throw ContractError("invalid session id '" + session_id + "'");
    return temp_root / "alive" / session_id;
}

fs::path segment_media_path(const fs::path& temp_root, const std::string& session_id, std::size_t seq) {
    return session_dir(temp_root, session_id) / fmt::format("seg_{}.mp4", seq);
}

std::string placeholder_clip(double duration) {
    qa::PcmAudio silence;
    silence.sample_rate = 16000;
    silence.channels = 1;
    silence.samples.assign(static_cast<std::size_t>(std::llround(std::max(0.0, duration) * 16000.0)), 0);
    const auto wav = qa::encode_wav(silence);

    std::string out;
    append_box_header(out, 20, "ftyp");
    out += "isom";
    out += std::string("\0\0\x02\0", 4);
    out += "isom";
    append_box_header(out, static_cast<std::uint32_t>(8 + wav.size()), "mdat");
    out.append(reinterpret_cast<const char*>(wav.data()), wav.size());
    return out;
}

StubSynthesizer::StubSynthesizer(fs::path temp_root, std::optional<double> latency_hint)
    : root_(std::move(temp_root)), latency_hint_(latency_hint) {}

SynthResult StubSynthesizer::synthesize(const SynthRequest& req) {
    const auto t0 = std::chrono::steady_clock::now();
    const double duration = kStubSecondsPerChar * static_cast<double>(req.text.size());
    const fs::path path = segment_media_path(root_, req.session_id, req.seq);
    fs::create_directories(path.parent_path());
    write_file(path, placeholder_clip(duration), "avatar");
    SynthResult r;
    r.media_ref = path.string();
    r.duration = duration;
    r.avatar_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

HttpSynthesizer::HttpSynthesizer(Endpoint endpoint, fs::path temp_root, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), root_(std::move(temp_root)) {
    opts_.timeout = timeout;
}

SynthResult HttpSynthesizer::synthesize(const SynthRequest& req) {
    const auto reply = post_json(endpoint_, nlohmann::json{{"text", req.text}}, "avatar", opts_);
    if (!reply.contains("media_url") || !reply["media_url"].is_string()) {
        throw AdapterError("avatar", "synthesizer reply lacks 'media_url'");
    }
    const std::string url = reply["media_url"].get<std::string>();
    SynthResult r;
    r.duration = reply.value("duration", 0.0);
    if (reply.contains("timings") && reply["timings"].is_object()) {
        const auto& t = reply["timings"];
        if (t.contains("tts")) r.tts_seconds = t["tts"].get<double>();
        if (t.contains("avatar")) r.avatar_seconds = t["avatar"].get<double>();
    }

    const fs::path target = segment_media_path(root_, req.session_id, req.seq);
    fs::create_directories(target.parent_path());
    if (url.rfind("http://", 0) == 0) {
        write_file(target, get_bytes(parse_endpoint(url), "avatar", opts_), "avatar");
    } else {
        const fs::path source = url.rfind("file://", 0) == 0 ? fs::path(url.substr(7)) : fs::path(url);
        std::error_code ec;
        fs::copy_file(source, target, fs::copy_options::overwrite_existing, ec);
        if (ec) throw AdapterError("avatar", "cannot copy clip " + source.string() + ": " + ec.message());
        r.temp_files.push_back(source.string());
    }
    r.media_ref = target.string();
    return r;
}

}  // namespace lectern::avatar
