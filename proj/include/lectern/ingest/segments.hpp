#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lectern/ingest/srt.hpp"

namespace lectern::ingest {

/// The retrieval atom: a run of consecutive cues from one lecture.
struct LectureSegment {
    std::string segment_id;  // "<lecture>-<ordinal, zero padded to 4>"
    std::string lecture_id;
    double start = 0.0;
    double end = 0.0;
    std::string text;

    bool operator==(const LectureSegment&) const = default;
};

struct SegmentationConfig {
    double max_span = 20.0;  // seconds

    void validate() const;
};

std::string make_segment_id(const std::string& lecture_id, std::size_t ordinal);

/// Greedy left-to-right merge. A segment keeps absorbing the next cue while
/// (max(segment_end, cue_end) - segment_start) <= max_span; otherwise it
/// closes and the cue opens a new segment. A cue longer than max_span on its
/// own becomes a singleton segment. Entries must be sorted by start
/// (ContractError otherwise).
std::vector<LectureSegment> merge_entries(std::span<const SubtitleEntry> entries,
                                          const SegmentationConfig& cfg,
                                          const std::string& lecture_id = "lecture");

struct IngestResult {
    std::vector<LectureSegment> segments;
    std::vector<std::string> warnings;
};

/// Parse and merge an SRT document already in memory. Cues that are out of
/// temporal order are stably sorted by start (with a warning); overlapping
/// cues are kept and reported.
IngestResult ingest_document(std::string_view srt, const std::string& lecture_id,
                             const SegmentationConfig& cfg);

/// ingest_document over a file. Errors are rethrown with the path prepended.
IngestResult ingest_lecture(const std::filesystem::path& srt_path, const std::string& lecture_id,
                            const SegmentationConfig& cfg);

/// Lecture ids become file-safe prefixes of segment ids.
bool is_valid_lecture_id(std::string_view id);

}  // namespace lectern::ingest
