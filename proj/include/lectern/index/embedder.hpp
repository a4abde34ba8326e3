#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lectern/util/http_transport.hpp"

namespace lectern::index {

/// Normalized embedding. `degenerate` marks an all-zero vector that could
/// not be normalized.
struct EmbeddingVector {
    std::vector<float> values;
    bool degenerate = false;

    std::size_t dimension() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Scale to unit Euclidean norm (accumulated in double). Zero vectors are
/// returned unchanged with `degenerate` set.
EmbeddingVector normalized(std::vector<float> values);

double inner_product(std::span<const float> a, std::span<const float> b);

/// Text -> vector adapter. Implementations must be deterministic and
/// honour dimension(). Adapters that cannot take concurrent calls return
/// true from serialized(); wrap them with SerializedEmbedder.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
    virtual bool serialized() const { return false; }
    /// "ok" or a short reason the adapter is degraded.
    virtual std::string health() const { return "ok"; }

    EmbeddingVector embed(const std::string& text);
};

/// Deterministic test embedder.
///
/// The text is lowercased (ASCII) and whitespace-normalized, hashed with
/// 64-bit FNV-1a, and the hash seeds SplitMix64. Component j is
/// 2*u_j - 1 where u_j = (next() >> 11) * 2^-53; the vector is then scaled
/// to unit norm.
EmbeddingVector stub_embed(std::string_view text, std::size_t dimension);

class StubEmbedder final : public Embedder {
public:
    explicit StubEmbedder(std::size_t dimension = 384);

    std::string name() const override { return "stub-fnv1a-splitmix64"; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    std::size_t dimension_;
};

/// Sum of stub vectors of the lowercased alphanumeric tokens, normalized.
/// Texts sharing words land near each other, which makes the CLI usable
/// without a real model.
class HashedBagOfWordsEmbedder final : public Embedder {
public:
    explicit HashedBagOfWordsEmbedder(std::size_t dimension = 384);

    std::string name() const override { return "hashed-bow"; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    std::size_t dimension_;
};

/// Local HTTP embedder: POST {"texts":[...]} -> {"vectors":[[...]]}.
class HttpEmbedder final : public Embedder {
public:
    HttpEmbedder(std::string name, std::size_t dimension, Endpoint endpoint);

    std::string name() const override { return name_; }
    std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
    bool serialized() const override { return true; }
    std::string health() const override;

private:
    std::string name_;
    std::size_t dimension_;
    Endpoint endpoint_;
};

/// Funnels calls to an adapter that declared serialized access through a mutex.
class SerializedEmbedder final : public Embedder {
public:
    explicit SerializedEmbedder(std::unique_ptr<Embedder> inner) : inner_(std::move(inner)) {}

    std::string name() const override { return inner_->name(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
        std::lock_guard lock(mutex_);
        return inner_->embed_batch(texts);
    }
    std::string health() const override { return inner_->health(); }

private:
    std::unique_ptr<Embedder> inner_;
    std::mutex mutex_;
};

/// Wraps in SerializedEmbedder when the adapter asks for it.
std::unique_ptr<Embedder> make_thread_safe(std::unique_ptr<Embedder> embedder);

}  // namespace lectern::index
