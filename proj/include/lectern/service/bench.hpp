#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "lectern/avatar/synth.hpp"
#include "lectern/index/store.hpp"
#include "lectern/qa/adapters.hpp"
#include "lectern/retrieval/retrieval.hpp"
#include "lectern/service/latency.hpp"

namespace lectern::service {

/// A store of `segments` 20-second segments spread over lectures of
/// `segments_per_lecture`, with pseudo-random vocabulary text, embedded
/// with the stub embedder. Deterministic in `seed`.
index::RagStore make_synthetic_store(std::size_t segments, std::size_t dimension = 384, std::uint64_t seed = 1,
                                     std::size_t segments_per_lecture = 180);

struct BenchOptions {
    std::size_t queries = 200;
    std::uint64_t seed = 7;
    retrieval::RetrievalConfig retrieval;
    avatar::Synthesizer* synth = nullptr;       // measure first-clip synthesis when set
    std::filesystem::path temp_root;
};

struct BenchReport {
    std::map<Stage, Percentiles> stages;  // only stages that ran
    Percentiles total;
};

/// Run `queries` question turns against `store`. Questions are word
/// samples from random segments, pause times uniform over the lecture.
BenchReport run_bench(const index::RagStore& store, index::Embedder& embedder, qa::LanguageModel& llm,
                      const BenchOptions& opts);

std::string format_bench(const BenchReport& report);

}  // namespace lectern::service
