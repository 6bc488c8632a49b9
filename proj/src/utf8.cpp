#include "morphexp/utf8.hpp"

namespace morphexp::utf8 {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at s[i]; advances i. Returns
// kReplacement and advances by one byte on malformed input.
char32_t decode_one(std::string_view s, std::size_t& i, bool& ok) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  ok = true;
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    ok = false;
    ++i;
    return kReplacement;
  }
  if (i + len > s.size()) {
    ok = false;
    ++i;
    return kReplacement;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ok = false;
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ok = false;
    ++i;
    return kReplacement;
  }
  i += len;
  return cp;
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

}  // namespace

bool is_valid(std::string_view s) {
  std::size_t i = 0;
  bool ok = true;
  while (i < s.size()) {
    decode_one(s, i, ok);
    if (!ok) return false;
  }
  return true;
}

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  bool ok;
  while (i < s.size()) out.push_back(decode_one(s, i, ok));
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) append(out, cp);
  return out;
}

std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

char32_t to_upper(char32_t cp) {
  if (in(cp, 'a', 'z')) return cp - 0x20;
  if (in(cp, 0xE0, 0xFE) && cp != 0xF7) return cp - 0x20;
  if (cp == 0xFF) return 0x178;
  if (in(cp, 0x100, 0x17F)) {
    // Latin Extended-A alternates upper/lower, with a phase shift in
    // 0x139..0x148 and 0x179..0x17E.
    const bool shifted = in(cp, 0x139, 0x148) || in(cp, 0x179, 0x17E);
    if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    const bool lower = shifted ? (cp % 2 == 0) : (cp % 2 == 1);
    return lower ? cp - 1 : cp;
  }
  if (in(cp, 0x3B1, 0x3C9) && cp != 0x3C2) return cp - 0x20;
  if (in(cp, 0x430, 0x44F)) return cp - 0x20;
  if (in(cp, 0x450, 0x45F)) return cp - 0x50;
  return cp;
}

char32_t to_lower(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 0x20;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (cp == 0x178) return 0xFF;
  if (in(cp, 0x100, 0x17F)) {
    const bool shifted = in(cp, 0x139, 0x148) || in(cp, 0x179, 0x17E);
    if (cp == 0x130 || cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    const bool upper = shifted ? (cp % 2 == 1) : (cp % 2 == 0);
    return upper ? cp + 1 : cp;
  }
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  return cp;
}

std::string capitalize(std::string_view s) {
  if (s.empty()) return {};
  std::size_t i = 0;
  bool ok;
  const char32_t first = decode_one(s, i, ok);
  std::string out;
  append(out, ok ? to_upper(first) : first);
  out.append(s.substr(i));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : decode(s)) append(out, to_lower(cp));
  return out;
}

bool is_digit(char32_t cp) {
  return in(cp, '0', '9') || in(cp, 0x660, 0x669) || in(cp, 0x6F0, 0x6F9) ||
         in(cp, 0x966, 0x96F) || in(cp, 0x9E6, 0x9EF) || in(cp, 0xFF10, 0xFF19);
}

bool is_joiner(char32_t cp) {
  return cp == '-' || cp == '\'' || cp == 0x2010 || cp == 0x2011 || cp == 0x2019;
}

bool is_alnum(char32_t cp) {
  if (cp < 0x80) {
    return in(cp, '0', '9') || in(cp, 'a', 'z') || in(cp, 'A', 'Z');
  }
  if (in(cp, 0x80, 0xBF)) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp == 0x37E || cp == 0x387) return false;              // Greek punctuation
  if (in(cp, 0x55A, 0x55F) || cp == 0x589) return false;      // Armenian
  if (in(cp, 0x5BE, 0x5C6) && cp != 0x5BF && cp != 0x5C1 && cp != 0x5C2 && cp != 0x5C4 &&
      cp != 0x5C5)
    return false;                                              // Hebrew punctuation
  if (cp == 0x60C || cp == 0x61B || cp == 0x61F || in(cp, 0x66A, 0x66D) || cp == 0x6D4)
    return false;                                              // Arabic punctuation
  if (cp == 0x964 || cp == 0x965) return false;                // danda
  if (cp == 0x1680 || in(cp, 0x2000, 0x2BFF)) return false;    // spaces, punctuation, symbols
  if (in(cp, 0x2E00, 0x2E7F) || in(cp, 0x3000, 0x303F)) return false;
  if (in(cp, 0xE000, 0xF8FF) || cp == 0xFEFF || cp == 0xFFFD) return false;
  if (in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
      in(cp, 0xFF5B, 0xFF65))
    return false;
  if (in(cp, 0x1F000, 0x1FAFF)) return false;                  // emoji and pictographs
  return true;
}

}  // namespace morphexp::utf8
