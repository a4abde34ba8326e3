#include "lectern/qa/qa.hpp"

#include <chrono>

#include "lectern/errors.hpp"
#include "lectern/qa/wav.hpp"
#include "lectern/util/text.hpp"

namespace lectern::qa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Answer answer_question(const index::RagStore& store, index::Embedder& embedder, LanguageModel& llm,
                       const retrieval::QueryContext& ctx, const retrieval::RetrievalConfig& cfg) {
    ctx.validate();
    cfg.validate();

    Answer answer;
    auto t0 = Clock::now();
    try {
        answer.evidence = retrieval::retrieve(store, embedder, ctx, cfg);
    } catch (const AdapterError& e) {
        answer.timings.retrieval = seconds_since(t0);
        answer.error = StageFailure{"retrieval", e.what()};
        return answer;
    }
    answer.timings.retrieval = seconds_since(t0);
    for (const auto& e : answer.evidence) answer.evidence_ids.push_back(e.segment.segment_id);

    const auto prompt = build_prompt(answer.evidence, ctx.question);

    t0 = Clock::now();
    try {
        std::string text = llm.complete(prompt.rendered);
        if (trim(text).empty()) throw AdapterError("llm", "language model returned an empty answer");
        answer.text = truncate_utf8(std::move(text), llm.max_answer_chars());
    } catch (const std::exception& e) {
        answer.timings.llm = seconds_since(t0);
        answer.error = StageFailure{"llm", e.what()};
        return answer;
    }
    answer.timings.llm = seconds_since(t0);
    return answer;
}

VoiceQuery transcribe_voice_query(SpeechRecognizer& asr, const std::string& wav_bytes) {
    (void)decode_voice_query(wav_bytes);
    const auto t0 = Clock::now();
    const Transcript tr = asr.transcribe(wav_bytes);
    VoiceQuery q;
    q.seconds = seconds_since(t0);
    q.text = trim(tr.text);
    q.no_speech = q.text.empty() || !tr.confident;
    if (q.no_speech) q.text.clear();
    return q;
}

}  // namespace lectern::qa
