#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace assoc::text {

// Decodes UTF-8 into code points. Invalid bytes are dropped.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Letters of the Latin, Greek and Cyrillic blocks plus CJK ideographs and kana.
bool is_letter(char32_t c);
bool is_space(char32_t c);

char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);

std::string lowercase(std::string_view s);
// First letter upper case, rest lower case.
std::string capitalize(std::string_view s);

// Removes every character that is not a letter, an ASCII digit, a hyphen,
// an apostrophe or whitespace; then trims and collapses whitespace runs to a
// single space. Idempotent.
std::string clean_text(std::string_view raw);

bool contains_space(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace assoc::text
