#include "lectern/service/bench.hpp"

#include <chrono>
#include <sstream>

#include <fmt/format.h>

#include "lectern/avatar/cleanup.hpp"
#include "lectern/avatar/sentences.hpp"
#include "lectern/errors.hpp"
#include "lectern/qa/qa.hpp"
#include "lectern/util/hash.hpp"

namespace lectern::service {

namespace {

constexpr std::array<const char*, 48> kVocabulary = {
    "projection", "filter",   "ramp",     "fourier",   "detector", "attenuation", "voxel",    "sinogram",
    "backprojection", "kernel", "noise",  "contrast",  "gantry",   "helical",     "pitch",    "slice",
    "reconstruction", "iterative", "prior", "gradient", "energy",  "spectrum",    "photon",   "beam",
    "hardening", "artifact",  "resolution", "sampling", "aliasing", "window",     "level",    "hounsfield",
    "dose",     "collimator", "scatter",  "calibration", "matrix", "geometry",    "fan",      "cone",
    "parallel", "interpolation", "convolution", "frequency", "domain", "signal",   "image",    "angle"};

std::string random_sentence(SplitMix64& rng, std::size_t words) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) s += ' ';
        s += kVocabulary[rng.next() % kVocabulary.size()];
    }
    return s;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

index::RagStore make_synthetic_store(std::size_t segments, std::size_t dimension, std::uint64_t seed,
                                     std::size_t segments_per_lecture) {
    if (segments == 0) throw ContractError("synthetic store needs at least one segment");
    segments_per_lecture = std::max<std::size_t>(segments_per_lecture, 1);
    SplitMix64 rng(seed);
    index::StubEmbedder embedder(dimension);
    index::VectorIndex idx(dimension);
    std::vector<ingest::LectureSegment> segs;
    std::vector<std::string> lectures;
    segs.reserve(segments);
    for (std::size_t i = 0; i < segments; ++i) {
        const std::size_t lecture_no = i / segments_per_lecture;
        const std::size_t ordinal = i % segments_per_lecture;
        const std::string lecture = fmt::format("lec{:03d}", lecture_no + 1);
        if (ordinal == 0) lectures.push_back(lecture);
        ingest::LectureSegment s{ingest::make_segment_id(lecture, ordinal), lecture, 20.0 * static_cast<double>(ordinal),
                                 20.0 * static_cast<double>(ordinal + 1), random_sentence(rng, 12 + rng.next() % 24)};
        idx.add(s.segment_id, embedder.embed(s.text).values);
        segs.push_back(std::move(s));
    }
    index::StoreMetadata meta{embedder.name(), dimension, 20.0, index::utc_now_iso8601(), lectures,
                              index::kStoreFormatVersion};
    return index::RagStore(std::move(idx), std::move(segs), std::move(meta));
}

BenchReport run_bench(const index::RagStore& store, index::Embedder& embedder, qa::LanguageModel& llm,
                      const BenchOptions& opts) {
    if (store.empty()) throw ConfigError("bench: store is empty");
    SplitMix64 rng(opts.seed);
    std::vector<double> retrieval_s, llm_s, avatar_s, tts_s, total_s;
    std::map<std::string, double> lecture_end;
    for (const auto& s : store.segments()) lecture_end[s.lecture_id] = std::max(lecture_end[s.lecture_id], s.end);

    for (std::size_t q = 0; q < opts.queries; ++q) {
        const auto& seg = store.segments()[rng.next() % store.size()];
        std::istringstream words(seg.text);
        std::string w, question;
        for (int i = 0; i < 6 && words >> w; ++i) question += (i ? " " : "") + w;
        question += "?";

        const retrieval::QueryContext ctx{question, rng.uniform() * lecture_end[seg.lecture_id], seg.lecture_id};

        const auto t0 = std::chrono::steady_clock::now();
        const auto answer = qa::answer_question(store, embedder, llm, ctx, opts.retrieval);
        if (!answer.ok()) throw AdapterError(answer.error->stage, answer.error->message);
        retrieval_s.push_back(answer.timings.retrieval);
        llm_s.push_back(answer.timings.llm);

        if (opts.synth) {
            const auto texts = avatar::split_sentences(answer.text);
            const std::string session = fmt::format("bench{:06d}", q);
            const auto t1 = std::chrono::steady_clock::now();
            const auto clip = opts.synth->synthesize({session, 0, texts.front()});
            avatar_s.push_back(clip.avatar_seconds.value_or(since(t1)));
            if (clip.tts_seconds) tts_s.push_back(*clip.tts_seconds);
            avatar::TempResourceRegistry reg{session, avatar::session_dir(opts.temp_root, session), {clip.media_ref}};
            for (const auto& f : clip.temp_files) reg.paths.insert(f);
            avatar::cleanup_session(reg);
        }
        total_s.push_back(since(t0));
    }

    BenchReport report;
    report.stages[Stage::retrieval] = percentiles(retrieval_s);
    report.stages[Stage::llm] = percentiles(llm_s);
    if (!tts_s.empty()) report.stages[Stage::tts] = percentiles(tts_s);
    if (!avatar_s.empty()) report.stages[Stage::avatar] = percentiles(avatar_s);
    report.total = percentiles(total_s);
    return report;
}

std::string format_bench(const BenchReport& report) {
    std::string out = fmt::format("{:<10} {:>8} {:>12} {:>12} {:>12}\n", "stage", "n", "p50 ms", "p95 ms", "p99 ms");
    auto row = [&](const std::string& name, const std::optional<Percentiles>& p) {
        if (!p) {
            out += fmt::format("{:<10} {:>8} {:>12} {:>12} {:>12}\n", name, "-", "n/a", "n/a", "n/a");
            return;
        }
        out += fmt::format("{:<10} {:>8} {:>12.3f} {:>12.3f} {:>12.3f}\n", name, p->count, p->p50 * 1e3, p->p95 * 1e3,
                           p->p99 * 1e3);
    };
    for (auto s : kStages) {
        const auto it = report.stages.find(s);
        row(to_string(s), it == report.stages.end() ? std::nullopt : std::optional<Percentiles>(it->second));
    }
    row("total", report.total);
    return out;
}

}  // namespace lectern::service
