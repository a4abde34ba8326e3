#pragma once

#include <string>
#include <string_view>

namespace lectern {

bool is_space(char c) noexcept;

/// Trim and collapse every whitespace run to a single ASCII space.
std::string normalize_whitespace(std::string_view s);

std::string trim(std::string_view s);

/// ASCII lowercase; bytes >= 0x80 pass through so UTF-8 stays intact.
std::string ascii_lower(std::string_view s);

/// "mm:ss" with minutes unbounded (e.g. 3725 s -> "62:05"). Fractions truncated.
std::string format_mm_ss(double seconds);

}  // namespace lectern
