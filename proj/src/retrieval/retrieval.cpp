#include "lectern/retrieval/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lectern/errors.hpp"
#include "lectern/util/text.hpp"

namespace lectern::retrieval {

void QueryContext::validate() const {
    if (trim(question).empty()) throw ContractError("question is empty");
    if (!(pause_time >= 0.0) || !std::isfinite(pause_time)) {
        throw ContractError(fmt::format("pause_time must be a non-negative number of seconds, got {}", pause_time));
    }
}

void RetrievalConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (top_k == 0) throw ConfigError("top_k must be >= 1");
    if (top_k > top_K) throw ConfigError(fmt::format("top_k ({}) must not exceed top_K ({})", top_k, top_K));
}

double midpoint(const LectureSegment& segment) { return (segment.start + segment.end) / 2.0; }

double adjusted_score(double semantic_score, double midpoint_s, double pause_time, double lambda) {
    return semantic_score - lambda * (std::abs(midpoint_s - pause_time) / 60.0);
}

bool ranks_before(const ScoredSegment& a, const ScoredSegment& b) {
    if (a.adjusted_score != b.adjusted_score) return a.adjusted_score > b.adjusted_score;
    if (a.semantic_score != b.semantic_score) return a.semantic_score > b.semantic_score;
    return a.segment.segment_id < b.segment.segment_id;
}

std::vector<ScoredSegment> temporal_rescore(std::vector<Candidate> candidates, double t, double lambda) {
    std::vector<ScoredSegment> out;
    out.reserve(candidates.size());
    for (auto& c : candidates) {
        const double mid = midpoint(c.segment);
        const double adj = adjusted_score(c.semantic_score, mid, t, lambda);
        out.push_back(ScoredSegment{std::move(c.segment), c.semantic_score, adj, mid});
    }
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

std::vector<ScoredSegment> retrieve(const index::RagStore& store, index::Embedder& embedder,
                                    const QueryContext& ctx, const RetrievalConfig& cfg) {
    ctx.validate();
    cfg.validate();
    if (store.empty()) {
        spdlog::warn("retrieve: store is empty, no evidence available");
        return {};
    }
    const auto& meta = store.metadata();
    if (embedder.name() != meta.embedder_name) {
        throw ConfigError(fmt::format("query embedder '{}' differs from the store's embedder '{}'",
                                      embedder.name(), meta.embedder_name));
    }
    if (embedder.dimension() != meta.dimension) {
        throw ConfigError(fmt::format("query embedder dimension {} differs from the store's {}",
                                      embedder.dimension(), meta.dimension));
    }

    const auto query = embedder.embed(ctx.question);

    // With a lecture filter the whole index is ranked and the first K rows of
    // that lecture are kept, i.e. the semantic top-K within the lecture.
    const std::size_t fetch = ctx.lecture_id ? store.size() : cfg.top_K;
    const auto hits = index::search_top_k(store.index(), query, fetch);

    std::vector<Candidate> candidates;
    candidates.reserve(std::min(cfg.top_K, hits.size()));
    for (const auto& hit : hits) {
        const auto& seg = store.segments()[hit.row];
        if (ctx.lecture_id && seg.lecture_id != *ctx.lecture_id) continue;
        candidates.push_back(Candidate{seg, hit.score});
        if (candidates.size() == cfg.top_K) break;
    }

    auto ranked = temporal_rescore(std::move(candidates), ctx.pause_time, cfg.lambda);
    if (ranked.size() > cfg.top_k) ranked.resize(cfg.top_k);
    return ranked;
}

}  // namespace lectern::retrieval
