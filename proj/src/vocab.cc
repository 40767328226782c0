#include "tokbridge/vocab.h"

#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tokbridge/error.h"
#include "tokbridge/utf8.h"

namespace tokbridge {
namespace {

constexpr std::string_view kWordPieceMarker = "##";
constexpr std::string_view kByteLevelSpace = "\xC4\xA0";  // U+0120 'Ġ'
constexpr std::string_view kSentencePieceMarker = "\xE2\x96\x81";  // U+2581

// Inverse of the GPT-2 byte -> printable code point table.
std::unordered_map<char32_t, unsigned char> build_byte_decoder() {
  std::array<bool, 256> printable{};
  for (int b = '!'; b <= '~'; ++b) printable[b] = true;
  for (int b = 0xA1; b <= 0xAC; ++b) printable[b] = true;
  for (int b = 0xAE; b <= 0xFF; ++b) printable[b] = true;
  std::unordered_map<char32_t, unsigned char> decoder;
  char32_t next = 256;
  for (int b = 0; b < 256; ++b) {
    const char32_t cp = printable[b] ? static_cast<char32_t>(b) : next++;
    decoder.emplace(cp, static_cast<unsigned char>(b));
  }
  return decoder;
}

bool is_sentencepiece_byte(std::string_view token) {
  if (token.size() != 6 || token.substr(0, 3) != "<0x" || token[5] != '>') {
    return false;
  }
  const auto hex = [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F') ||
           (c >= 'a' && c <= 'f');
  };
  return hex(token[3]) && hex(token[4]);
}

Vocabulary parse_json_vocab(const std::string& text,
                            const std::string& source_name,
                            Convention convention, const RoleTable& roles) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source_name, 0, e.what());
  }
  if (!doc.is_object()) {
    throw ParseError(source_name, 0, "expected a JSON object token -> id");
  }
  std::vector<std::string> tokens(doc.size());
  std::vector<bool> filled(doc.size(), false);
  for (const auto& [token, id_value] : doc.items()) {
    if (!id_value.is_number_integer()) {
      throw ParseError(source_name, 0, "id of \"" + token + "\" is not an integer");
    }
    const auto id = id_value.get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= tokens.size() ||
        filled[static_cast<std::size_t>(id)]) {
      throw ValidationError(token, "ids are not dense 0.." +
                                       std::to_string(tokens.size() - 1) +
                                       " (id " + std::to_string(id) + ")");
    }
    tokens[static_cast<std::size_t>(id)] = token;
    filled[static_cast<std::size_t>(id)] = true;
  }
  return Vocabulary(std::move(tokens), convention, roles);
}

}  // namespace

std::string_view to_string(Convention convention) {
  switch (convention) {
    case Convention::kWordPiece: return "wordpiece";
    case Convention::kBpeByte: return "bpe_byte";
    case Convention::kSentencePiece: return "sentencepiece";
    case Convention::kPlain: return "plain";
  }
  return "?";
}

std::optional<Convention> parse_convention(std::string_view name) {
  for (Convention c : {Convention::kWordPiece, Convention::kBpeByte,
                       Convention::kSentencePiece, Convention::kPlain}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(SpecialRole role) {
  switch (role) {
    case SpecialRole::kUnk: return "unk";
    case SpecialRole::kPad: return "pad";
    case SpecialRole::kCls: return "cls";
    case SpecialRole::kSep: return "sep";
    case SpecialRole::kMask: return "mask";
  }
  return "?";
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, Convention convention,
                       const RoleTable& roles)
    : tokens_(std::move(tokens)), convention_(convention) {
  if (tokens_.empty()) throw ValidationError("vocab", "vocabulary is empty");
  index_.reserve(tokens_.size());
  for (std::size_t id = 0; id < tokens_.size(); ++id) {
    if (tokens_[id].empty()) {
      throw ValidationError("vocab", "empty token at id " + std::to_string(id));
    }
    if (!utf8::is_valid(tokens_[id])) {
      throw ValidationError("vocab", "token " + std::to_string(id) +
                                         " is not valid UTF-8");
    }
    if (!index_.emplace(tokens_[id], id).second) {
      throw ValidationError(tokens_[id], "duplicate token \"" + tokens_[id] + "\"");
    }
  }
  for (const auto& [role, names] : roles.names) {
    for (const auto& name : names) {
      const auto it = index_.find(name);
      if (it == index_.end()) continue;
      roles_by_id_.emplace(it->second, role);
      auto [slot, inserted] = specials_.emplace(role, it->second);
      if (!inserted && it->second < slot->second) slot->second = it->second;
    }
  }
  if (!specials_.contains(SpecialRole::kUnk)) {
    throw ValidationError("unk", "vocabulary has no unknown-token entry");
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Vocabulary::special(SpecialRole role) const {
  const auto it = specials_.find(role);
  if (it == specials_.end()) return std::nullopt;
  return it->second;
}

std::optional<SpecialRole> Vocabulary::role_of(std::size_t id) const {
  const auto it = roles_by_id_.find(id);
  if (it == roles_by_id_.end()) return std::nullopt;
  return it->second;
}

Vocabulary parse_vocab(std::istream& in, const std::string& source_name,
                       Convention convention, const RoleTable& roles) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    if (nlohmann::json::accept(text)) {
      return parse_json_vocab(text, source_name, convention, roles);
    }
  }

  std::vector<std::string> tokens;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError(source_name, line_no, "empty token");
    tokens.push_back(std::move(line));
  }
  return Vocabulary(std::move(tokens), convention, roles);
}

Vocabulary load_vocab(const std::filesystem::path& path, Convention convention,
                      const RoleTable& roles) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  return parse_vocab(in, path.string(), convention, roles);
}

std::optional<std::string> decode_byte_level(std::string_view token) {
  static const auto decoder = build_byte_decoder();
  std::string bytes;
  std::size_t pos = 0;
  while (pos < token.size()) {
    const auto it = decoder.find(utf8::decode(token, pos));
    if (it == decoder.end()) return std::nullopt;
    bytes.push_back(static_cast<char>(it->second));
  }
  return bytes;
}

TokenShape classify_token(std::string_view token, Convention convention) {
  TokenShape shape;
  switch (convention) {
    case Convention::kWordPiece:
      if (token.starts_with(kWordPieceMarker)) {
        shape.position = TokenPosition::kContinuation;
        token.remove_prefix(kWordPieceMarker.size());
      }
      shape.core_text = std::string(token);
      break;
    case Convention::kSentencePiece:
      if (is_sentencepiece_byte(token)) {
        shape.position = TokenPosition::kContinuation;
        shape.byte_fallback = true;
        shape.core_text = std::string(token);
      } else if (token.starts_with(kSentencePieceMarker)) {
        token.remove_prefix(kSentencePieceMarker.size());
        shape.core_text = std::string(token);
      } else {
        shape.position = TokenPosition::kContinuation;
        shape.core_text = std::string(token);
      }
      break;
    case Convention::kBpeByte: {
      const bool marked = token.starts_with(kByteLevelSpace);
      shape.position = marked ? TokenPosition::kWordInitial
                              : TokenPosition::kContinuation;
      const std::string_view rest =
          marked ? token.substr(kByteLevelSpace.size()) : token;
      const auto bytes = decode_byte_level(rest);
      if (!bytes) {
        shape.core_text = std::string(rest);
      } else if (utf8::is_valid(*bytes)) {
        shape.core_text = *bytes;
      } else {
        shape.core_text = std::string(rest);
        shape.byte_fallback = true;
      }
      break;
    }
    case Convention::kPlain:
      shape.core_text = std::string(token);
      break;
  }
  shape.alphabetic = !shape.byte_fallback && utf8::contains_letter(shape.core_text);
  return shape;
}

TokenShape classify_token(const Vocabulary& vocab, std::size_t id) {
  TokenShape shape = classify_token(vocab.token(id), vocab.convention());
  shape.token_id = id;
  shape.special = vocab.is_special(id);
  return shape;
}

}  // namespace tokbridge
