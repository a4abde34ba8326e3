#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lectern::avatar {

inline constexpr std::size_t kMinSegmentChars = 40;

/// Sentence-level split for segmented synthesis.
///
/// Whitespace is collapsed first. A break falls after a run of '.', '!' or
/// '?' (plus any closing quotes or brackets) that is followed by whitespace,
/// unless the word ending there is a known abbreviation ("e.g.", "Dr.",
/// "Fig.", ...). Sentences are then accumulated until a segment reaches
/// `min_chars`; a short remainder at the end joins the previous segment.
/// Joining the result with single spaces reproduces the normalized input.
std::vector<std::string> split_sentences(std::string_view answer, std::size_t min_chars = kMinSegmentChars);

/// The raw sentence boundaries before short-sentence merging.
std::vector<std::string> sentence_units(std::string_view answer);

}  // namespace lectern::avatar
