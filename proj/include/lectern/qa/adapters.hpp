#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "lectern/util/http_transport.hpp"

namespace lectern::qa {

/// Prompt -> answer. Returning an empty string is a contract violation;
/// adapters that decline should return a refusal sentence instead.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;

    virtual std::string name() const = 0;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::size_t max_answer_chars() const { return 4000; }
    virtual bool serialized() const { return false; }
    virtual std::string health() const { return "ok"; }
};

inline constexpr const char* kRefusalAnswer =
    "The lecture excerpts do not cover this question.";

/// Answers with the first sentence of the first excerpt in the prompt, or
/// kRefusalAnswer when the prompt carries no excerpts.
class EchoLanguageModel final : public LanguageModel {
public:
    std::string name() const override { return "echo"; }
    std::string complete(const std::string& prompt) override;
};

/// POST {"prompt": "..."} -> {"text": "..."}.
class HttpLanguageModel final : public LanguageModel {
public:
    HttpLanguageModel(Endpoint endpoint, std::size_t max_answer_chars, std::chrono::milliseconds timeout);

    std::string name() const override { return "http:" + endpoint_.authority(); }
    std::string complete(const std::string& prompt) override;
    std::size_t max_answer_chars() const override { return max_chars_; }
    bool serialized() const override { return true; }
    std::string health() const override { return probe(endpoint_); }

private:
    Endpoint endpoint_;
    std::size_t max_chars_;
    HttpOptions opts_;
};

struct Transcript {
    std::string text;
    bool confident = false;

    bool operator==(const Transcript&) const = default;
};

/// WAV bytes (16 kHz mono PCM) -> transcript. Confidence is the adapter's call.
class SpeechRecognizer {
public:
    virtual ~SpeechRecognizer() = default;

    virtual std::string name() const = 0;
    virtual Transcript transcribe(const std::string& wav_bytes) = 0;
    virtual bool serialized() const { return false; }
    virtual std::string health() const { return "ok"; }
};

/// Table-driven recognizer keyed by FNV-1a of the exact WAV bytes.
/// Unknown audio transcribes to {"", false}.
class StubSpeechRecognizer final : public SpeechRecognizer {
public:
    std::string name() const override { return "stub-table"; }
    Transcript transcribe(const std::string& wav_bytes) override;

    void add(const std::string& wav_bytes, Transcript transcript);
    void add_hash(std::uint64_t hash, Transcript transcript);

private:
    std::map<std::uint64_t, Transcript> table_;
};

/// multipart POST of the WAV as field "audio" -> {"text": "...", "confident": bool}.
class HttpSpeechRecognizer final : public SpeechRecognizer {
public:
    HttpSpeechRecognizer(Endpoint endpoint, std::chrono::milliseconds timeout);

    std::string name() const override { return "http:" + endpoint_.authority(); }
    Transcript transcribe(const std::string& wav_bytes) override;
    bool serialized() const override { return true; }
    std::string health() const override { return probe(endpoint_); }

private:
    Endpoint endpoint_;
    HttpOptions opts_;
};

/// One-at-a-time access for adapters that declare serialized().
class SerializedLanguageModel final : public LanguageModel {
public:
    explicit SerializedLanguageModel(std::unique_ptr<LanguageModel> inner) : inner_(std::move(inner)) {}

    std::string name() const override { return inner_->name(); }
    std::string complete(const std::string& prompt) override {
        std::lock_guard lock(mutex_);
        return inner_->complete(prompt);
    }
    std::size_t max_answer_chars() const override { return inner_->max_answer_chars(); }
    std::string health() const override { return inner_->health(); }

private:
    std::unique_ptr<LanguageModel> inner_;
    std::mutex mutex_;
};

class SerializedSpeechRecognizer final : public SpeechRecognizer {
public:
    explicit SerializedSpeechRecognizer(std::unique_ptr<SpeechRecognizer> inner) : inner_(std::move(inner)) {}

    std::string name() const override { return inner_->name(); }
    Transcript transcribe(const std::string& wav_bytes) override {
        std::lock_guard lock(mutex_);
        return inner_->transcribe(wav_bytes);
    }
    std::string health() const override { return inner_->health(); }

private:
    std::unique_ptr<SpeechRecognizer> inner_;
    std::mutex mutex_;
};

std::unique_ptr<LanguageModel> make_thread_safe(std::unique_ptr<LanguageModel> llm);
std::unique_ptr<SpeechRecognizer> make_thread_safe(std::unique_ptr<SpeechRecognizer> asr);

/// Cut to at most `max_chars` bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string s, std::size_t max_chars);

}  // namespace lectern::qa
