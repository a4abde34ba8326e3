#include "lectern/ingest/segments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lectern/errors.hpp"

namespace lectern::ingest {

void SegmentationConfig::validate() const {
    if (!(max_span > 0.0) || !std::isfinite(max_span)) {
        throw ConfigError(fmt::format("max_span must be a positive number of seconds, got {}", max_span));
    }
}

std::string make_segment_id(const std::string& lecture_id, std::size_t ordinal) {
    return fmt::format("{}-{:04d}", lecture_id, ordinal);
}

bool is_valid_lecture_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_' || c == '.';
    });
}

std::vector<LectureSegment> merge_entries(std::span<const SubtitleEntry> entries,
                                          const SegmentationConfig& cfg,
                                          const std::string& lecture_id) {
    cfg.validate();
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].start < entries[i - 1].start) {
            throw ContractError(fmt::format("merge_entries: entries not sorted by start (cue {} at {} after {})",
                                            entries[i].index, entries[i].start, entries[i - 1].start));
        }
    }

    std::vector<LectureSegment> out;
    if (entries.empty()) return out;

    LectureSegment current{"", lecture_id, entries[0].start, entries[0].end, entries[0].text};
    auto close = [&] {
        current.segment_id = make_segment_id(lecture_id, out.size());
        out.push_back(std::move(current));
    };

    for (std::size_t i = 1; i < entries.size(); ++i) {
        const auto& cue = entries[i];
        const double candidate_end = std::max(current.end, cue.end);
        if (candidate_end - current.start <= cfg.max_span) {
            current.end = candidate_end;
            current.text += ' ';
            current.text += cue.text;
        } else {
            close();
            current = LectureSegment{"", lecture_id, cue.start, cue.end, cue.text};
        }
    }
    close();
    return out;
}

IngestResult ingest_document(std::string_view srt, const std::string& lecture_id,
                             const SegmentationConfig& cfg) {
    if (!is_valid_lecture_id(lecture_id)) {
        throw ConfigError("lecture id '" + lecture_id + "' must match [A-Za-z0-9._-]{1,128}");
    }
    auto doc = parse_srt(srt);
    IngestResult result;
    result.warnings = std::move(doc.warnings);

    auto& entries = doc.entries;
    if (!std::is_sorted(entries.begin(), entries.end(),
                        [](const auto& a, const auto& b) { return a.start < b.start; })) {
        result.warnings.push_back("cues are not in temporal order; sorted by start time");
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) { return a.start < b.start; });
    }
    std::size_t overlaps = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].start < entries[i - 1].end) ++overlaps;
    }
    if (overlaps > 0) {
        result.warnings.push_back(fmt::format("{} overlapping cue pair(s); segments may overlap", overlaps));
    }

    result.segments = merge_entries(entries, cfg, lecture_id);
    return result;
}

IngestResult ingest_lecture(const std::filesystem::path& srt_path, const std::string& lecture_id,
                            const SegmentationConfig& cfg) {
    std::ifstream in(srt_path, std::ios::binary);
    if (!in) throw Error("cannot open SRT file " + srt_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    try {
        return ingest_document(bytes, lecture_id, cfg);
    } catch (const EmptyDocumentError& e) {
        throw EmptyDocumentError(srt_path.string() + ": " + e.what(), e.offset(), e.cue());
    } catch (const ParseError& e) {
        throw ParseError(srt_path.string() + ": " + e.what(), e.offset(), e.cue());
    }
}

}  // namespace lectern::ingest
