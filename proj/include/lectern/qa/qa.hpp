#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lectern/index/store.hpp"
#include "lectern/qa/adapters.hpp"
#include "lectern/qa/prompt.hpp"
#include "lectern/retrieval/retrieval.hpp"

namespace lectern::qa {

/// Seconds spent per stage of a turn.
struct StageTimings {
    double asr = 0.0;
    double retrieval = 0.0;
    double llm = 0.0;
};

struct StageFailure {
    std::string stage;  // "retrieval" or "llm"
    std::string message;
};

struct Answer {
    std::string text;
    std::vector<std::string> evidence_ids;
    std::vector<retrieval::ScoredSegment> evidence;
    StageTimings timings;
    std::optional<StageFailure> error;

    bool ok() const { return !error.has_value(); }
};

/// retrieve -> build_prompt -> llm.complete. Nothing is written anywhere.
///
/// An empty question throws ContractError before any adapter is called;
/// an embedder mismatch throws ConfigError. Adapter failures come back as
/// an Answer with `error` set and the failing stage named.
Answer answer_question(const index::RagStore& store, index::Embedder& embedder, LanguageModel& llm,
                       const retrieval::QueryContext& ctx, const retrieval::RetrievalConfig& cfg);

struct VoiceQuery {
    bool no_speech = false;
    std::string text;
    double seconds = 0.0;
};

/// Decode, transcribe, and flag empty or low-confidence transcripts as
/// no-speech so the caller can ask the student to retry. Undecodable audio
/// throws FormatError; adapter failures throw AdapterError("asr").
VoiceQuery transcribe_voice_query(SpeechRecognizer& asr, const std::string& wav_bytes);

}  // namespace lectern::qa
