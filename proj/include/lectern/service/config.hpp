#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "lectern/avatar/synth.hpp"
#include "lectern/index/embedder.hpp"
#include "lectern/index/store.hpp"
#include "lectern/qa/adapters.hpp"
#include "lectern/retrieval/retrieval.hpp"

namespace lectern::service {

struct AvatarConfig {
    std::size_t lookahead = 2;
    std::size_t preload_count = 2;
    std::size_t workers = 2;
};

/// Adapter selection as written in the config document. `kind` is "stub"
/// (or "echo"/"hashed-bow" where applicable) or "http".
struct AdapterSpec {
    std::string kind;
    std::string url;
    std::string name;                     // http embedder model name
    std::size_t dimension = 0;            // embedders; 0 = take from the store
    std::size_t max_answer_chars = 4000;  // llm
    std::chrono::milliseconds timeout{30000};
    std::optional<double> latency_hint;   // stub synthesizer
    nlohmann::json table = nlohmann::json::object();  // stub recognizer: "<16 hex fnv1a64>" -> {text, confident}
};

inline AdapterSpec spec_of(std::string kind) {
    AdapterSpec spec;
    spec.kind = std::move(kind);
    return spec;
}

struct ServiceConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::filesystem::path temp_root = std::filesystem::temp_directory_path();
    std::chrono::seconds session_ttl{15 * 60};
    retrieval::RetrievalConfig retrieval;
    AvatarConfig avatar;
    std::optional<AdapterSpec> embedder;  // absent: rebuild the store's own stub embedder
    AdapterSpec llm = spec_of("echo");
    AdapterSpec asr = spec_of("stub");
    AdapterSpec synth = spec_of("stub");
    std::optional<std::filesystem::path> static_dir;
};

/// Parse the JSON config document; unknown keys are rejected so typos do
/// not silently fall back to defaults.
ServiceConfig parse_config(const nlohmann::json& doc);
ServiceConfig load_config(const std::filesystem::path& path);

struct Adapters {
    std::unique_ptr<index::Embedder> embedder;
    std::unique_ptr<qa::LanguageModel> llm;
    std::unique_ptr<qa::SpeechRecognizer> asr;
    std::unique_ptr<avatar::Synthesizer> synth;
};

/// Embedder matching a store built by this tool ("stub-fnv1a-splitmix64" or
/// "hashed-bow"). Throws ConfigError for any other name.
std::unique_ptr<index::Embedder> builtin_embedder(const std::string& name, std::size_t dimension);

std::unique_ptr<index::Embedder> make_embedder(const AdapterSpec& spec, std::size_t store_dimension);

/// Instantiate adapters, wrapping the ones that need serialized access.
Adapters make_adapters(const ServiceConfig& cfg, const index::StoreMetadata& store_meta);

}  // namespace lectern::service
