#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sedkit {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// UTF-8 helpers. Invalid sequences decode as U+FFFD and consume one byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

/// Simple case folding for Latin, Greek, Cyrillic and Armenian blocks;
/// other scripts (Arabic, CJK) are caseless and pass through.
char32_t to_lower(char32_t cp);
std::string to_lower_utf8(std::string_view s);

/// True for letters, digits and combining marks; false for whitespace,
/// punctuation, symbols and emoji.
bool is_word_codepoint(char32_t cp);

}  // namespace sedkit
