#include "lectern/ingest/srt.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>

#include <fmt/format.h>

#include "lectern/errors.hpp"
#include "lectern/util/text.hpp"

namespace lectern::ingest {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!is_digit(c)) return false;
    }
    return true;
}

// Reads exactly `count` digits starting at `pos`; `base` is the offset of
// `raw` inside whatever larger buffer the caller reports against.
std::int64_t read_digits(std::string_view raw, std::size_t& pos, std::size_t count,
                         std::size_t base, const char* field) {
    std::int64_t v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (pos >= raw.size() || !is_digit(raw[pos])) {
            throw ParseError(fmt::format("timestamp '{}': expected digit in {} at byte {}", raw,
                                         field, base + pos),
                             base + pos);
        }
        v = v * 10 + (raw[pos] - '0');
        ++pos;
    }
    return v;
}

void expect_char(std::string_view raw, std::size_t& pos, std::string_view accepted,
                 std::size_t base) {
    if (pos >= raw.size() || accepted.find(raw[pos]) == std::string_view::npos) {
        throw ParseError(fmt::format("timestamp '{}': expected one of \"{}\" at byte {}", raw,
                                     accepted, base + pos),
                         base + pos);
    }
    ++pos;
}

std::int64_t parse_timestamp_ms(std::string_view raw, std::size_t base) {
    std::size_t pos = 0;
    std::size_t hour_digits = 0;
    while (hour_digits < raw.size() && is_digit(raw[hour_digits])) ++hour_digits;
    if (hour_digits == 0 || hour_digits > 3) {
        throw ParseError(fmt::format("timestamp '{}': expected 1-3 hour digits at byte {}", raw,
                                     base + std::min(hour_digits, raw.size())),
                         base + std::min(hour_digits, raw.size()));
    }
    const auto hh = read_digits(raw, pos, hour_digits, base, "hours");
    expect_char(raw, pos, ":", base);
    const auto mm = read_digits(raw, pos, 2, base, "minutes");
    expect_char(raw, pos, ":", base);
    const auto ss = read_digits(raw, pos, 2, base, "seconds");
    expect_char(raw, pos, ",.", base);
    const auto ms = read_digits(raw, pos, 3, base, "milliseconds");
    if (pos != raw.size()) {
        throw ParseError(
            fmt::format("timestamp '{}': trailing characters at byte {}", raw, base + pos),
            base + pos);
    }
    if (mm > 59) throw ParseError(fmt::format("timestamp '{}': minutes out of range", raw), base + hour_digits + 1);
    if (ss > 59) throw ParseError(fmt::format("timestamp '{}': seconds out of range", raw), base + hour_digits + 4);
    return ((hh * 60 + mm) * 60 + ss) * 1000 + ms;
}

std::vector<std::string_view> split_lines(std::string_view doc) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= doc.size()) {
        std::size_t nl = doc.find('\n', start);
        if (nl == std::string_view::npos) nl = doc.size();
        std::string_view line = doc.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == doc.size()) break;
        start = nl + 1;
    }
    return lines;
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool is_timecode_line(std::string_view line) { return line.find("-->") != std::string_view::npos; }

struct Timecode {
    double start;
    double end;
};

// "00:00:01,000 --> 00:00:02,000 X1:.. Y1:.." ; coordinates after the end
// time are ignored.
Timecode parse_timecode_line(std::string_view line, std::size_t line_offset, int cue) {
    const auto arrow = line.find("-->");
    std::string_view lhs = line.substr(0, arrow);
    std::string_view rhs = line.substr(arrow + 3);
    std::size_t lhs_base = line_offset;
    while (!lhs.empty() && is_space(lhs.front())) {
        lhs.remove_prefix(1);
        ++lhs_base;
    }
    lhs = trim_view(lhs);
    std::size_t rhs_base = line_offset + arrow + 3;
    while (!rhs.empty() && is_space(rhs.front())) {
        rhs.remove_prefix(1);
        ++rhs_base;
    }
    std::size_t rhs_end = 0;
    while (rhs_end < rhs.size() && !is_space(rhs[rhs_end])) ++rhs_end;
    rhs = rhs.substr(0, rhs_end);
    try {
        const double start = static_cast<double>(parse_timestamp_ms(lhs, lhs_base)) / 1000.0;
        const double end = static_cast<double>(parse_timestamp_ms(rhs, rhs_base)) / 1000.0;
        return {start, end};
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("cue {}: {}", cue, e.what()), e.offset(), cue);
    }
}

}  // namespace

double parse_timestamp(std::string_view raw) {
    return static_cast<double>(parse_timestamp_ms(raw, 0)) / 1000.0;
}

std::string format_timestamp(double seconds) {
    if (!(seconds >= 0.0)) seconds = 0.0;
    const auto total = static_cast<std::int64_t>(std::llround(seconds * 1000.0));
    const auto ms = total % 1000;
    const auto s = (total / 1000) % 60;
    const auto m = (total / 60000) % 60;
    const auto h = total / 3600000;
    return fmt::format("{:02d}:{:02d}:{:02d},{:03d}", h, m, s, ms);
}

std::string strip_markup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '<') {
            const auto close = text.find('>', i + 1);
            std::size_t name = i + 1;
            if (name < text.size() && text[name] == '/') ++name;
            const bool tag_like = close != std::string_view::npos && name < close &&
                                  std::isalpha(static_cast<unsigned char>(text[name]));
            if (tag_like) {
                i = close + 1;
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

SrtDocument parse_srt(std::string_view bytes) {
    SrtDocument doc;
    std::size_t bom = 0;
    if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bom = 3;
    const std::string_view body = bytes.substr(bom);
    const auto lines = split_lines(body);

    // Byte offset of each line relative to the full input.
    std::vector<std::size_t> offsets(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        offsets[i] = bom + static_cast<std::size_t>(lines[i].data() - body.data());
    }

    int last_index = 0;
    int highest_index = 0;
    std::size_t i = 0;
    while (i < lines.size()) {
        if (trim_view(lines[i]).empty()) {
            ++i;
            continue;
        }

        std::optional<int> number;
        const std::string_view first = trim_view(lines[i]);
        if (all_digits(first) && i + 1 < lines.size() && is_timecode_line(lines[i + 1])) {
            long long n = 0;
            for (char c : first) n = std::min<long long>(n * 10 + (c - '0'), 1'000'000'000);
            number = static_cast<int>(n);
            ++i;
        } else if (!is_timecode_line(lines[i])) {
            doc.warnings.push_back(fmt::format("line {}: stray text outside a cue ignored", i + 1));
            ++i;
            continue;
        }

        const int cue = number.value_or(last_index + 1);
        if (!number) {
            doc.warnings.push_back(fmt::format("line {}: cue without number, assigned {}", i + 1, cue));
        }
        const Timecode tc = parse_timecode_line(lines[i], offsets[i], cue);
        ++i;

        std::string raw_text;
        while (i < lines.size() && !trim_view(lines[i]).empty()) {
            // A numbered cue that starts without a blank separator.
            if (all_digits(trim_view(lines[i])) && i + 1 < lines.size() &&
                is_timecode_line(lines[i + 1])) {
                break;
            }
            if (!raw_text.empty()) raw_text.push_back(' ');
            raw_text.append(lines[i]);
            ++i;
        }

        if (cue <= highest_index) {
            doc.warnings.push_back(
                fmt::format("cue {} is out of numeric order (follows cue {})", cue, last_index));
        }
        last_index = cue;
        highest_index = std::max(highest_index, cue);

        std::string text = normalize_whitespace(strip_markup(raw_text));
        if (text.empty()) {
            doc.warnings.push_back(fmt::format("cue {}: empty text, dropped", cue));
            continue;
        }
        if (!(tc.end > tc.start)) {
            doc.warnings.push_back(fmt::format("cue {}: end {} not after start {}, dropped", cue,
                                               format_timestamp(tc.end),
                                               format_timestamp(tc.start)));
            continue;
        }
        doc.entries.push_back(SubtitleEntry{cue, tc.start, tc.end, std::move(text)});
    }

    if (doc.entries.empty()) throw EmptyDocumentError("SRT document contains no parsable cues");
    return doc;
}

}  // namespace lectern::ingest
