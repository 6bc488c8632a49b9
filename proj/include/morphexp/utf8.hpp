#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Minimal UTF-8 helpers. Case mapping covers ASCII, Latin-1, Latin
// Extended-A, Greek and Cyrillic; other scripts are caseless here.
namespace morphexp::utf8 {

bool is_valid(std::string_view s);

// Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);
void append(std::string& out, char32_t cp);

// Number of code points.
std::size_t length(std::string_view s);

char32_t to_upper(char32_t cp);
char32_t to_lower(char32_t cp);

// First code point uppercased, remainder unchanged.
std::string capitalize(std::string_view s);
std::string to_lower(std::string_view s);

// Decimal digit in any of the supported scripts.
bool is_digit(char32_t cp);
// Letters, marks and digits; everything that can appear inside a token
// except the hyphen and apostrophe joiners.
bool is_alnum(char32_t cp);
bool is_joiner(char32_t cp);

}  // namespace morphexp::utf8
