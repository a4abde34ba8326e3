#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lectern::ingest {

/// One SRT cue. Times are in seconds; text has markup stripped and
/// whitespace collapsed.
struct SubtitleEntry {
    int index = 0;
    double start = 0.0;
    double end = 0.0;
    std::string text;

    bool operator==(const SubtitleEntry&) const = default;
};

struct SrtDocument {
    std::vector<SubtitleEntry> entries;  // file order
    std::vector<std::string> warnings;
};

/// "HH:MM:SS,mmm" (or "HH:MM:SS.mmm") to seconds. The result is exactly
/// total_milliseconds / 1000.0. Throws ParseError carrying the byte offset
/// of the first offending character.
double parse_timestamp(std::string_view raw);

/// Inverse of parse_timestamp, rounded to the nearest millisecond, always
/// using a comma separator. Hours are zero-padded to two digits.
std::string format_timestamp(double seconds);

/// Parse a UTF-8 SRT document. Tolerates a BOM, CRLF line endings, missing
/// or out-of-order cue numbers, missing blank separators before a numbered
/// cue, and extra coordinates after the timecode. Cues that are empty after
/// markup stripping, or whose end is not after their start, are dropped
/// with a warning.
///
/// Throws ParseError (with the cue number) on an unparsable timecode line
/// and EmptyDocumentError when no cue survives.
SrtDocument parse_srt(std::string_view bytes);

/// Remove simple angle-bracket tags such as <i>, </b>, <font color="x">.
std::string strip_markup(std::string_view text);

}  // namespace lectern::ingest
