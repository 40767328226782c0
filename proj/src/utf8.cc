#include "tokbridge/utf8.h"

#include <algorithm>
#include <cstdint>

namespace tokbridge::utf8 {
namespace {

struct CodePointRange {
  char32_t lo;
  char32_t hi;
};

struct CodePointPair {
  char32_t from;
  char32_t to;
};

#include "unicode_tables.inc"

constexpr char32_t kReplacement = 0xFFFD;

bool is_continuation(unsigned char byte) { return (byte & 0xC0) == 0x80; }

}  // namespace

char32_t decode(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return kReplacement;
  }
  for (std::size_t i = 1; i <= extra; ++i) {
    const auto byte = static_cast<unsigned char>(text[pos + i]);
    if (!is_continuation(byte)) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (byte & 0x3F);
  }
  // Overlong forms, surrogates and out-of-range values are rejected.
  static constexpr char32_t kMinForLength[] = {0, 0x80, 0x800, 0x10000};
  if (cp < kMinForLength[extra] || cp > 0x10FFFF ||
      (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += extra + 1;
  return cp;
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

std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

std::vector<std::size_t> boundaries(std::string_view text) {
  std::vector<std::size_t> result;
  std::size_t pos = 0;
  while (pos < text.size()) {
    result.push_back(pos);
    decode(text, pos);
  }
  result.push_back(text.size());
  return result;
}

std::size_t length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t pos = 0; pos < text.size(); ++count) decode(text, pos);
  return count;
}

bool is_valid(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t before = pos;
    const char32_t cp = decode(text, pos);
    // A genuine U+FFFD occupies three bytes; a decode failure advances one.
    if (cp == kReplacement && pos - before == 1) return false;
  }
  return true;
}

bool is_letter(char32_t cp) {
  const auto* end = std::end(kLetterRanges);
  const auto* it = std::upper_bound(
      std::begin(kLetterRanges), end, cp,
      [](char32_t value, const CodePointRange& r) { return value < r.lo; });
  if (it == std::begin(kLetterRanges)) return false;
  --it;
  return cp <= it->hi;
}

bool contains_letter(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (is_letter(decode(text, pos))) return true;
  }
  return false;
}

bool contains_whitespace(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = decode(text, pos);
    switch (cp) {
      case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
      case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
      case 0x202F: case 0x205F: case 0x3000:
        return true;
      default:
        if (cp >= 0x2000 && cp <= 0x200A) return true;
    }
  }
  return false;
}

char32_t to_lower(char32_t cp) {
  const auto* end = std::end(kLowercasePairs);
  const auto* it = std::lower_bound(
      std::begin(kLowercasePairs), end, cp,
      [](const CodePointPair& p, char32_t value) { return p.from < value; });
  return (it != end && it->from == cp) ? it->to : cp;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode(text, pos);
    if (cp == kReplacement && pos - start == 1) {
      out.append(text.substr(start, 1));
    } else {
      append(out, to_lower(cp));
    }
  }
  return out;
}

}  // namespace tokbridge::utf8
