#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lectern/index/vector_index.hpp"
#include "lectern/ingest/segments.hpp"

namespace lectern::index {

inline constexpr int kStoreFormatVersion = 1;

struct StoreMetadata {
    std::string embedder_name;
    std::size_t dimension = 0;
    double max_span = 20.0;
    std::string created_at;  // ISO-8601 UTC, e.g. 2026-01-02T03:04:05Z
    std::vector<std::string> lecture_ids;
    int format_version = kStoreFormatVersion;

    bool operator==(const StoreMetadata&) const = default;
};

/// Embeddings, segment records and configuration for one or more lectures.
/// Row i of the index belongs to segments()[i]. Immutable once loaded.
class RagStore {
public:
    RagStore() = default;
    RagStore(VectorIndex index, std::vector<ingest::LectureSegment> segments, StoreMetadata meta);

    const VectorIndex& index() const { return index_; }
    const std::vector<ingest::LectureSegment>& segments() const { return segments_; }
    const StoreMetadata& metadata() const { return meta_; }

    std::size_t size() const { return segments_.size(); }
    bool empty() const { return segments_.empty(); }
    const ingest::LectureSegment* find(const std::string& segment_id) const;
    bool has_lecture(const std::string& lecture_id) const;

    bool operator==(const RagStore& other) const {
        return index_ == other.index_ && segments_ == other.segments_ && meta_ == other.meta_;
    }

private:
    VectorIndex index_;
    std::vector<ingest::LectureSegment> segments_;
    StoreMetadata meta_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

std::string utc_now_iso8601();

/// Embed `segments` and return a store holding `base` plus this lecture.
/// Rows already present for the same lecture are replaced. The embedder
/// name and dimension must match `base` when it is non-empty.
RagStore add_lecture(const RagStore& base, const std::vector<ingest::LectureSegment>& segments,
                     Embedder& embedder, double max_span);

/// Writes vectors.f32, segments.jsonl and meta.json into `dir` (created if
/// needed). Each file is written to a temporary name and renamed.
void save_store(const RagStore& store, const std::filesystem::path& dir);

/// Throws StoreError naming the violated invariant: missing file, format
/// version, dimension, row/id count, duplicate ids, unnormalized rows,
/// lecture list mismatch.
RagStore load_store(const std::filesystem::path& dir);

}  // namespace lectern::index
