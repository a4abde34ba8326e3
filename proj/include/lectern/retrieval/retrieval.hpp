#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lectern/index/store.hpp"

namespace lectern::retrieval {

using ingest::LectureSegment;

struct QueryContext {
    std::string question;
    double pause_time = 0.0;  // seconds into the lecture
    std::optional<std::string> lecture_id;

    void validate() const;
};

struct RetrievalConfig {
    double lambda = 0.1;       // score penalty per minute between segment midpoint and pause time
    std::size_t top_K = 20;    // semantic candidates
    std::size_t top_k = 4;     // evidence kept after rescoring

    void validate() const;
};

struct ScoredSegment {
    LectureSegment segment;
    double semantic_score = 0.0;
    double adjusted_score = 0.0;
    double midpoint = 0.0;
};

struct Candidate {
    LectureSegment segment;
    double semantic_score = 0.0;
};

double midpoint(const LectureSegment& segment);

/// adjusted = semantic - lambda * (|midpoint - t| / 60).
double adjusted_score(double semantic_score, double midpoint_s, double pause_time, double lambda);

/// Strict ranking order: adjusted score descending, then semantic score
/// descending, then segment id ascending.
bool ranks_before(const ScoredSegment& a, const ScoredSegment& b);

/// Rescore every candidate against pause time `t` and sort by ranks_before.
std::vector<ScoredSegment> temporal_rescore(std::vector<Candidate> candidates, double t, double lambda);

/// The full procedure:
///  1. embed the question with the store's embedder (names must match),
///  2. take the top-K segments by inner product (within `lecture_id` when set),
///  3-4. rescore the candidates by distance from the pause time,
///  5. keep the first top_k.
/// Throws ConfigError on an embedder mismatch; an empty store yields an
/// empty result.
std::vector<ScoredSegment> retrieve(const index::RagStore& store, index::Embedder& embedder,
                                    const QueryContext& ctx, const RetrievalConfig& cfg);

}  // namespace lectern::retrieval
