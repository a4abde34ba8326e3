#include "lectern/service/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lectern/errors.hpp"

namespace lectern::service {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
}

AdapterSpec parse_adapter(const json& j, const std::string& where, const std::set<std::string>& kinds) {
    reject_unknown(j, {"kind", "url", "name", "dimension", "max_answer_chars", "timeout_ms", "latency_hint", "table"},
                   where);
    AdapterSpec s;
    s.kind = j.value("kind", std::string());
    if (!kinds.count(s.kind)) throw ConfigError(fmt::format("{}.kind '{}' is not supported", where, s.kind));
    s.url = j.value("url", std::string());
    s.name = j.value("name", std::string());
    s.dimension = j.value("dimension", std::size_t{0});
    s.max_answer_chars = j.value("max_answer_chars", std::size_t{4000});
    s.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
    if (j.contains("latency_hint")) s.latency_hint = j["latency_hint"].get<double>();
    if (j.contains("table")) s.table = j["table"];
    if (s.kind == "http") {
        if (s.url.empty()) throw ConfigError(where + ": http adapter needs 'url'");
        const auto ep = parse_endpoint(s.url);
        if (!ep.is_loopback()) {
            spdlog::warn("{} points at non-loopback host {}; queries will leave this machine", where, ep.host);
        }
    }
    return s;
}

}  // namespace

ServiceConfig parse_config(const json& doc) {
    try {
        reject_unknown(doc, {"bind", "port", "temp_root", "session_ttl_seconds", "retrieval", "avatar", "adapters",
                             "static_dir"},
                       "config");
        ServiceConfig c;
        c.bind = doc.value("bind", c.bind);
        c.port = doc.value("port", c.port);
        if (doc.contains("temp_root")) c.temp_root = doc["temp_root"].get<std::string>();
        c.session_ttl = std::chrono::seconds(doc.value("session_ttl_seconds", static_cast<long>(c.session_ttl.count())));
        if (doc.contains("static_dir")) c.static_dir = doc["static_dir"].get<std::string>();
        if (doc.contains("retrieval")) {
            const auto& r = doc["retrieval"];
            reject_unknown(r, {"lambda", "top_K", "top_k"}, "retrieval");
            c.retrieval.lambda = r.value("lambda", c.retrieval.lambda);
            c.retrieval.top_K = r.value("top_K", c.retrieval.top_K);
            c.retrieval.top_k = r.value("top_k", c.retrieval.top_k);
        }
        c.retrieval.validate();
        if (doc.contains("avatar")) {
            const auto& a = doc["avatar"];
            reject_unknown(a, {"lookahead", "preload_count", "workers"}, "avatar");
            c.avatar.lookahead = a.value("lookahead", c.avatar.lookahead);
            c.avatar.preload_count = a.value("preload_count", c.avatar.preload_count);
            c.avatar.workers = a.value("workers", c.avatar.workers);
            if (c.avatar.workers == 0) throw ConfigError("avatar.workers must be >= 1");
        }
        if (c.session_ttl.count() <= 0) throw ConfigError("session_ttl_seconds must be positive");
        if (doc.contains("adapters")) {
            const auto& a = doc["adapters"];
            reject_unknown(a, {"embedder", "llm", "asr", "synth"}, "adapters");
            if (a.contains("embedder")) {
                c.embedder = parse_adapter(a["embedder"], "adapters.embedder", {"stub", "hashed-bow", "http"});
            }
            if (a.contains("llm")) c.llm = parse_adapter(a["llm"], "adapters.llm", {"echo", "http"});
            if (a.contains("asr")) c.asr = parse_adapter(a["asr"], "adapters.asr", {"stub", "http"});
            if (a.contains("synth")) c.synth = parse_adapter(a["synth"], "adapters.synth", {"stub", "http"});
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return parse_config(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::unique_ptr<index::Embedder> builtin_embedder(const std::string& name, std::size_t dimension) {
    if (name == index::StubEmbedder(8).name()) return std::make_unique<index::StubEmbedder>(dimension);
    if (name == index::HashedBagOfWordsEmbedder(8).name()) {
        return std::make_unique<index::HashedBagOfWordsEmbedder>(dimension);
    }
    throw ConfigError("store embedder '" + name + "' is not built in; configure adapters.embedder");
}

std::unique_ptr<index::Embedder> make_embedder(const AdapterSpec& spec, std::size_t store_dimension) {
    const std::size_t d = spec.dimension != 0 ? spec.dimension : store_dimension;
    if (spec.kind == "stub") return std::make_unique<index::StubEmbedder>(d);
    if (spec.kind == "hashed-bow") return std::make_unique<index::HashedBagOfWordsEmbedder>(d);
    if (spec.name.empty()) throw ConfigError("adapters.embedder: http embedder needs 'name'");
    return index::make_thread_safe(std::make_unique<index::HttpEmbedder>(spec.name, d, parse_endpoint(spec.url)));
}

Adapters make_adapters(const ServiceConfig& cfg, const index::StoreMetadata& store_meta) {
    Adapters a;
    a.embedder = cfg.embedder ? make_embedder(*cfg.embedder, store_meta.dimension)
                              : builtin_embedder(store_meta.embedder_name, store_meta.dimension);

    if (cfg.llm.kind == "echo") {
        a.llm = std::make_unique<qa::EchoLanguageModel>();
    } else {
        a.llm = qa::make_thread_safe(std::unique_ptr<qa::LanguageModel>(std::make_unique<qa::HttpLanguageModel>(
            parse_endpoint(cfg.llm.url), cfg.llm.max_answer_chars, cfg.llm.timeout)));
    }

    if (cfg.asr.kind == "stub") {
        auto stub = std::make_unique<qa::StubSpeechRecognizer>();
        for (const auto& [hex, entry] : cfg.asr.table.items()) {
            std::uint64_t h = 0;
            try {
                h = std::stoull(hex, nullptr, 16);
            } catch (const std::exception&) {
                throw ConfigError("adapters.asr.table key '" + hex + "' is not a hex hash");
            }
            stub->add_hash(h, qa::Transcript{entry.value("text", std::string()), entry.value("confident", true)});
        }
        a.asr = std::move(stub);
    } else {
        a.asr = qa::make_thread_safe(std::unique_ptr<qa::SpeechRecognizer>(
            std::make_unique<qa::HttpSpeechRecognizer>(parse_endpoint(cfg.asr.url), cfg.asr.timeout)));
    }

    if (cfg.synth.kind == "stub") {
        a.synth = std::make_unique<avatar::StubSynthesizer>(cfg.temp_root, cfg.synth.latency_hint);
    } else {
        a.synth = std::make_unique<avatar::HttpSynthesizer>(parse_endpoint(cfg.synth.url), cfg.temp_root,
                                                            cfg.synth.timeout);
    }
    return a;
}

}  // namespace lectern::service
