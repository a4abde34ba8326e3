#include "lectern/index/vector_index.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "lectern/errors.hpp"

namespace lectern::index {

VectorIndex::VectorIndex(std::size_t dimension, std::vector<float> matrix, std::vector<std::string> ids)
    : dimension_(dimension), matrix_(std::move(matrix)), ids_(std::move(ids)) {
    if (dimension_ == 0 || matrix_.size() != ids_.size() * dimension_) {
        throw ContractError(fmt::format("vector index: {} values do not form {} rows of dimension {}",
                                        matrix_.size(), ids_.size(), dimension_));
    }
}

void VectorIndex::add(std::string id, std::span<const float> row) {
    if (row.size() != dimension_) {
        throw ContractError(fmt::format("vector index: row for '{}' has dimension {}, index has {}", id,
                                        row.size(), dimension_));
    }
    matrix_.insert(matrix_.end(), row.begin(), row.end());
    ids_.push_back(std::move(id));
}

std::vector<SearchHit> search_top_k(const VectorIndex& index, const EmbeddingVector& query,
                                    std::size_t k) {
    if (k == 0) throw ContractError("search_top_k: K must be >= 1");
    if (query.dimension() != index.dimension()) {
        throw ContractError(fmt::format("search_top_k: query dimension {} does not match index dimension {}",
                                        query.dimension(), index.dimension()));
    }
    const std::size_t n = index.size();
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = inner_product(index.row(i), query.values);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return index.id(a) < index.id(b);
    };
    const std::size_t take = std::min(k, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);

    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const auto i = order[r];
        hits.push_back(SearchHit{i, index.id(i), scores[i]});
    }
    return hits;
}

VectorIndex build_index(std::span<const ingest::LectureSegment> segments, Embedder& embedder,
                        std::size_t batch_size) {
    if (segments.empty()) throw ContractError("build_index: no segments");
    batch_size = std::max<std::size_t>(batch_size, 1);
    VectorIndex index(embedder.dimension());

    for (std::size_t begin = 0; begin < segments.size(); begin += batch_size) {
        const std::size_t end = std::min(segments.size(), begin + batch_size);
        std::vector<std::string> texts;
        for (std::size_t i = begin; i < end; ++i) texts.push_back(segments[i].text);

        std::vector<EmbeddingVector> vectors;
        try {
            vectors = embedder.embed_batch(texts);
            if (vectors.size() != texts.size()) throw Error("wrong number of vectors returned");
        } catch (const std::exception& batch_error) {
            // Retry one by one to name the segment that fails.
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    (void)embedder.embed(segments[i].text);
                } catch (const std::exception& e) {
                    throw AdapterError("retrieval", fmt::format("embedding segment '{}' failed: {}",
                                                                segments[i].segment_id, e.what()));
                }
            }
            throw AdapterError("retrieval", fmt::format("embedding batch starting at '{}' failed: {}",
                                                        segments[begin].segment_id, batch_error.what()));
        }
        for (std::size_t i = begin; i < end; ++i) {
            const auto& v = vectors[i - begin];
            if (v.dimension() != index.dimension()) {
                throw AdapterError("retrieval", fmt::format("embedding segment '{}' returned dimension {}, expected {}",
                                                            segments[i].segment_id, v.dimension(), index.dimension()));
            }
            index.add(segments[i].segment_id, v.values);
        }
    }
    return index;
}

}  // namespace lectern::index
