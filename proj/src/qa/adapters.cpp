#include "lectern/qa/adapters.hpp"

#include "lectern/errors.hpp"
#include "lectern/qa/prompt.hpp"
#include "lectern/util/hash.hpp"
#include "lectern/util/text.hpp"

namespace lectern::qa {

namespace {

std::string first_sentence(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
            return std::string(text.substr(0, i + 1));
        }
    }
    return std::string(text);
}

}  // namespace

std::string EchoLanguageModel::complete(const std::string& prompt) {
    const std::string header = "Lecture excerpts:\n";
    const auto at = prompt.find(header);
    if (at == std::string::npos) return kRefusalAnswer;
    const auto line_start = at + header.size();
    const auto line_end = prompt.find('\n', line_start);
    const std::string_view line = std::string_view(prompt).substr(line_start, line_end - line_start);
    if (line.empty() || line.front() != '[') return kRefusalAnswer;
    const auto close = line.find("] ");
    if (close == std::string_view::npos) return kRefusalAnswer;
    return first_sentence(line.substr(close + 2));
}

HttpLanguageModel::HttpLanguageModel(Endpoint endpoint, std::size_t max_answer_chars,
                                     std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), max_chars_(max_answer_chars) {
    opts_.timeout = timeout;
}

std::string HttpLanguageModel::complete(const std::string& prompt) {
    const auto reply = post_json(endpoint_, nlohmann::json{{"prompt", prompt}}, "llm", opts_);
    if (!reply.contains("text") || !reply["text"].is_string()) {
        throw AdapterError("llm", "language model reply lacks a 'text' string");
    }
    return reply["text"].get<std::string>();
}

Transcript StubSpeechRecognizer::transcribe(const std::string& wav_bytes) {
    const auto it = table_.find(fnv1a64(wav_bytes));
    if (it == table_.end()) return Transcript{"", false};
    return it->second;
}

void StubSpeechRecognizer::add(const std::string& wav_bytes, Transcript transcript) {
    table_[fnv1a64(wav_bytes)] = std::move(transcript);
}

void StubSpeechRecognizer::add_hash(std::uint64_t hash, Transcript transcript) {
    table_[hash] = std::move(transcript);
}

HttpSpeechRecognizer::HttpSpeechRecognizer(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)) {
    opts_.timeout = timeout;
}

Transcript HttpSpeechRecognizer::transcribe(const std::string& wav_bytes) {
    const auto reply = post_multipart_file(endpoint_, "audio", "query.wav", "audio/wav", wav_bytes, "asr", opts_);
    if (!reply.contains("text") || !reply["text"].is_string()) {
        throw AdapterError("asr", "speech recognizer reply lacks a 'text' string");
    }
    return Transcript{reply["text"].get<std::string>(), reply.value("confident", true)};
}

std::unique_ptr<LanguageModel> make_thread_safe(std::unique_ptr<LanguageModel> llm) {
    if (llm->serialized()) return std::make_unique<SerializedLanguageModel>(std::move(llm));
    return llm;
}

std::unique_ptr<SpeechRecognizer> make_thread_safe(std::unique_ptr<SpeechRecognizer> asr) {
    if (asr->serialized()) return std::make_unique<SerializedSpeechRecognizer>(std::move(asr));
    return asr;
}

std::string truncate_utf8(std::string s, std::size_t max_chars) {
    if (s.size() <= max_chars) return s;
    std::size_t cut = max_chars;
    while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    s.resize(cut);
    return s;
}

}  // namespace lectern::qa
