#include "lectern/avatar/sentences.hpp"

#include <algorithm>
#include <array>

#include "lectern/util/text.hpp"

namespace lectern::avatar {

namespace {

constexpr std::array<std::string_view, 24> kAbbreviations = {
    "e.g.", "i.e.", "etc.", "vs.", "cf.",  "approx.", "dr.", "mr.",  "mrs.", "ms.",  "prof.", "st.",
    "fig.", "figs.", "eq.", "eqs.", "no.", "vol.",    "ch.", "sec.", "al.",  "jr.",  "sr.",   "ca."};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool ends_with_abbreviation(std::string_view text, std::size_t dot) {
    std::size_t begin = dot;
    while (begin > 0 && !is_space(text[begin - 1])) --begin;
    std::string word = ascii_lower(text.substr(begin, dot + 1 - begin));
    while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) {
        word.erase(word.begin());
    }
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

}  // namespace

std::vector<std::string> sentence_units(std::string_view answer) {
    const std::string text = normalize_whitespace(answer);
    std::vector<std::string> units;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_terminator(text[j])) ++j;
        const std::size_t last_terminator = j - 1;
        while (j < text.size() && is_closer(text[j])) ++j;
        const bool at_space = j < text.size() && text[j] == ' ';
        const bool single_period = j - i == 1 && text[i] == '.';
        if (at_space && !(single_period && ends_with_abbreviation(text, last_terminator))) {
            units.push_back(text.substr(start, j - start));
            start = j + 1;
        }
        i = j;
    }
    if (start < text.size()) units.push_back(text.substr(start));
    return units;
}

std::vector<std::string> split_sentences(std::string_view answer, std::size_t min_chars) {
    std::vector<std::string> segments;
    std::string current;
    for (auto& unit : sentence_units(answer)) {
        if (!current.empty()) current += ' ';
        current += unit;
        if (current.size() >= min_chars) {
            segments.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        if (segments.empty()) {
            segments.push_back(std::move(current));
        } else {
            segments.back() += ' ';
            segments.back() += current;
        }
    }
    return segments;
}

}  // namespace lectern::avatar
