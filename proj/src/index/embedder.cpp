#include "lectern/index/embedder.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lectern/errors.hpp"
#include "lectern/util/hash.hpp"
#include "lectern/util/text.hpp"

namespace lectern::index {

EmbeddingVector normalized(std::vector<float> values) {
    double sq = 0.0;
    for (float v : values) sq += static_cast<double>(v) * static_cast<double>(v);
    EmbeddingVector out;
    if (sq == 0.0 || !std::isfinite(sq)) {
        out.values.assign(values.size(), 0.0f);
        out.degenerate = true;
        return out;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (float& v : values) v = static_cast<float>(static_cast<double>(v) * inv);
    out.values = std::move(values);
    return out;
}

double inner_product(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

EmbeddingVector Embedder::embed(const std::string& text) {
    auto out = embed_batch(std::span<const std::string>(&text, 1));
    if (out.size() != 1) {
        throw AdapterError("retrieval", fmt::format("embedder '{}' returned {} vectors for 1 text",
                                                    name(), out.size()));
    }
    return std::move(out.front());
}

namespace {

std::vector<double> raw_stub_vector(std::string_view canonical, std::size_t dimension) {
    SplitMix64 rng(fnv1a64(canonical));
    std::vector<double> v(dimension);
    for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
    return v;
}

EmbeddingVector normalized(const std::vector<double>& values) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    EmbeddingVector out;
    out.values.assign(values.size(), 0.0f);
    if (sq == 0.0) {
        out.degenerate = true;
        return out;
    }
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<float>(values[i] / norm);
    return out;
}

}  // namespace

EmbeddingVector stub_embed(std::string_view text, std::size_t dimension) {
    const std::string canonical = ascii_lower(normalize_whitespace(text));
    return normalized(raw_stub_vector(canonical, dimension));
}

StubEmbedder::StubEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension < 8) throw ConfigError("stub embedder dimension must be >= 8");
}

std::vector<EmbeddingVector> StubEmbedder::embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(stub_embed(t, dimension_));
    return out;
}

HashedBagOfWordsEmbedder::HashedBagOfWordsEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension < 8) throw ConfigError("hashed-bow embedder dimension must be >= 8");
}

std::vector<EmbeddingVector> HashedBagOfWordsEmbedder::embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        const std::string lower = ascii_lower(t);
        std::vector<double> acc(dimension_, 0.0);
        std::size_t i = 0;
        while (i < lower.size()) {
            auto word_char = [&](char c) {
                return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                       static_cast<unsigned char>(c) >= 0x80;
            };
            if (!word_char(lower[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < lower.size() && word_char(lower[j])) ++j;
            const auto token = raw_stub_vector(std::string_view(lower).substr(i, j - i), dimension_);
            for (std::size_t k = 0; k < dimension_; ++k) acc[k] += token[k];
            i = j;
        }
        std::vector<float> v(dimension_);
        for (std::size_t k = 0; k < dimension_; ++k) v[k] = static_cast<float>(acc[k]);
        out.push_back(normalized(std::move(v)));
    }
    return out;
}

HttpEmbedder::HttpEmbedder(std::string name, std::size_t dimension, Endpoint endpoint)
    : name_(std::move(name)), dimension_(dimension), endpoint_(std::move(endpoint)) {
    if (dimension_ == 0) throw ConfigError("http embedder dimension must be positive");
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
    nlohmann::json body;
    body["texts"] = std::vector<std::string>(texts.begin(), texts.end());
    const auto reply = post_json(endpoint_, body, "retrieval");
    if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
        throw AdapterError("retrieval", "embedder reply lacks a 'vectors' array");
    }
    const auto& rows = reply["vectors"];
    if (rows.size() != texts.size()) {
        throw AdapterError("retrieval", fmt::format("embedder returned {} vectors for {} texts",
                                                    rows.size(), texts.size()));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != dimension_) {
            throw AdapterError("retrieval", fmt::format("embedder vector has dimension {}, expected {}",
                                                        row.is_array() ? row.size() : 0, dimension_));
        }
        out.push_back(normalized(row.get<std::vector<float>>()));
    }
    return out;
}

std::string HttpEmbedder::health() const { return probe(endpoint_); }

std::unique_ptr<Embedder> make_thread_safe(std::unique_ptr<Embedder> embedder) {
    if (embedder->serialized()) return std::make_unique<SerializedEmbedder>(std::move(embedder));
    return embedder;
}

}  // namespace lectern::index
