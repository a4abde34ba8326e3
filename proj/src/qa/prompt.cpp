#include "lectern/qa/prompt.hpp"

#include "lectern/errors.hpp"
#include "lectern/util/text.hpp"

namespace lectern::qa {

std::string excerpt_prefix(double start, double end) {
    return "[" + format_mm_ss(start) + "–" + format_mm_ss(end) + "]";
}

PromptBundle build_prompt(const std::vector<retrieval::ScoredSegment>& retrieved, const std::string& question) {
    if (trim(question).empty()) throw ContractError("build_prompt: question is empty");

    PromptBundle bundle;
    bundle.system_instruction = kSystemInstruction;
    bundle.question = question;
    for (const auto& r : retrieved) {
        bundle.evidence.push_back(EvidenceItem{r.segment.segment_id, r.segment.start, r.segment.end, r.segment.text});
    }

    std::string& out = bundle.rendered;
    out += bundle.system_instruction;
    out += "\n\nLecture excerpts:\n";
    if (bundle.evidence.empty()) {
        out += kNoExcerptsMarker;
        out += '\n';
    }
    for (const auto& e : bundle.evidence) {
        out += excerpt_prefix(e.start, e.end);
        out += ' ';
        out += e.text;
        out += '\n';
    }
    out += "\nQuestion: ";
    out += question;
    out += "\nAnswer:";
    return bundle;
}

}  // namespace lectern::qa
