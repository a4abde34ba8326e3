#pragma once

#include <string>
#include <vector>

#include "lectern/retrieval/retrieval.hpp"

namespace lectern::qa {

inline constexpr const char* kPromptTemplateVersion = "lecture-qa/1";
inline constexpr const char* kNoExcerptsMarker = "(no lecture excerpts available)";
inline constexpr const char* kSystemInstruction =
    "You are a teaching assistant for a recorded lecture. Answer the student's question using only "
    "the lecture excerpts below. If the excerpts are insufficient to answer, say so.";

struct EvidenceItem {
    std::string segment_id;
    double start = 0.0;
    double end = 0.0;
    std::string text;
};

struct PromptBundle {
    std::string system_instruction;
    std::vector<EvidenceItem> evidence;  // retrieval order
    std::string question;
    std::string rendered;
};

/// "[mm:ss–mm:ss]" (en dash) for a segment time range.
std::string excerpt_prefix(double start, double end);

/// Render the fixed template:
///
///   <system instruction>
///
///   Lecture excerpts:
///   [mm:ss–mm:ss] <text>        (one line per excerpt, or the no-excerpts marker)
///
///   Question: <question>
///   Answer:
PromptBundle build_prompt(const std::vector<retrieval::ScoredSegment>& retrieved, const std::string& question);

}  // namespace lectern::qa
