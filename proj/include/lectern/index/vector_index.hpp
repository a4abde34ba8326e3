#pragma once

#include <span>
#include <string>
#include <vector>

#include "lectern/index/embedder.hpp"
#include "lectern/ingest/segments.hpp"

namespace lectern::index {

/// Exact inner-product index: N rows of d floats, row-major, with the
/// segment id of each row.
class VectorIndex {
public:
    VectorIndex() = default;
    explicit VectorIndex(std::size_t dimension) : dimension_(dimension) {}
    VectorIndex(std::size_t dimension, std::vector<float> matrix, std::vector<std::string> ids);

    void add(std::string id, std::span<const float> row);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    std::span<const float> row(std::size_t i) const {
        return {matrix_.data() + i * dimension_, dimension_};
    }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<float>& matrix() const { return matrix_; }

    bool operator==(const VectorIndex&) const = default;

private:
    std::size_t dimension_ = 0;
    std::vector<float> matrix_;
    std::vector<std::string> ids_;
};

struct SearchHit {
    std::size_t row = 0;
    std::string segment_id;
    double score = 0.0;  // exact inner product, accumulated in double
};

/// Top min(K, N) rows by inner product, descending; ties broken by
/// ascending segment id. Throws ContractError on K == 0 or a dimension
/// mismatch.
std::vector<SearchHit> search_top_k(const VectorIndex& index, const EmbeddingVector& query,
                                    std::size_t k);

/// Embed every segment (batches of `batch_size`) and build the index.
/// An embedder failure aborts with AdapterError naming the failing segment.
VectorIndex build_index(std::span<const ingest::LectureSegment> segments, Embedder& embedder,
                        std::size_t batch_size = 64);

}  // namespace lectern::index
