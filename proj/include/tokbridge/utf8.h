#ifndef TOKBRIDGE_UTF8_H_
#define TOKBRIDGE_UTF8_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tokbridge::utf8 {

// Decodes one code point starting at `pos`. Invalid sequences decode to the
// single lead byte (as U+FFFD) and advance by one byte, so iteration always
// terminates.
char32_t decode(std::string_view text, std::size_t& pos);

void append(std::string& out, char32_t cp);
std::string encode(char32_t cp);

// Byte offsets of every code point boundary, including text.size().
std::vector<std::size_t> boundaries(std::string_view text);

std::size_t length(std::string_view text);
bool is_valid(std::string_view text);

bool is_letter(char32_t cp);
bool contains_letter(std::string_view text);
bool contains_whitespace(std::string_view text);

// Simple one-to-one Unicode lowercase mapping.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

}  // namespace tokbridge::utf8

#endif  // TOKBRIDGE_UTF8_H_
