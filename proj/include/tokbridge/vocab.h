#ifndef TOKBRIDGE_VOCAB_H_
#define TOKBRIDGE_VOCAB_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tokbridge {

// How a tokenizer marks word boundaries on its pieces.
enum class Convention {
  kWordPiece,      // "##" marks continuations
  kBpeByte,        // byte-level BPE, "Ġ" marks word starts
  kSentencePiece,  // "▁" marks word starts
  kPlain,          // every token is a word start
};

std::string_view to_string(Convention convention);
// Accepts "wordpiece", "bpe_byte", "sentencepiece" and "plain".
std::optional<Convention> parse_convention(std::string_view name);

enum class SpecialRole { kUnk, kPad, kCls, kSep, kMask };

std::string_view to_string(SpecialRole role);
inline constexpr SpecialRole kAllRoles[] = {
    SpecialRole::kUnk, SpecialRole::kPad, SpecialRole::kCls,
    SpecialRole::kSep, SpecialRole::kMask};

// Token spellings recognized for each special role.
struct RoleTable {
  std::map<SpecialRole, std::vector<std::string>> names = {
      {SpecialRole::kUnk, {"[UNK]", "<unk>"}},
      {SpecialRole::kPad, {"[PAD]", "<pad>"}},
      {SpecialRole::kCls, {"[CLS]", "<s>"}},
      {SpecialRole::kSep, {"[SEP]", "</s>"}},
      {SpecialRole::kMask, {"[MASK]", "<mask>"}},
  };
};

class Vocabulary {
 public:
  // Throws ValidationError on empty or duplicate tokens, or when no token
  // fills the unk role.
  Vocabulary(std::vector<std::string> tokens, Convention convention,
             const RoleTable& roles = {});

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  Convention convention() const { return convention_; }

  std::optional<std::size_t> find(std::string_view token) const;
  // Lowest id spelled as one of the role's names.
  std::optional<std::size_t> special(SpecialRole role) const;
  std::size_t unk_id() const { return *special(SpecialRole::kUnk); }
  std::optional<SpecialRole> role_of(std::size_t id) const;
  bool is_special(std::size_t id) const { return role_of(id).has_value(); }

 private:
  std::vector<std::string> tokens_;
  Convention convention_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<SpecialRole, std::size_t> specials_;
  std::unordered_map<std::size_t, SpecialRole> roles_by_id_;
};

// Reads either one token per line or a JSON object mapping token -> id.
Vocabulary parse_vocab(std::istream& in, const std::string& source_name,
                       Convention convention, const RoleTable& roles = {});
Vocabulary load_vocab(const std::filesystem::path& path, Convention convention,
                      const RoleTable& roles = {});

enum class TokenPosition { kWordInitial, kContinuation };

struct TokenShape {
  std::size_t token_id = 0;
  std::string core_text;  // boundary marker stripped
  TokenPosition position = TokenPosition::kWordInitial;
  bool alphabetic = false;  // core_text contains a Unicode letter
  bool special = false;
  // Raw-byte pieces (partial UTF-8 in byte-level BPE, "<0xNN>" in
  // SentencePiece). Never alphabetic; matched by exact spelling only.
  bool byte_fallback = false;
};

TokenShape classify_token(std::string_view token, Convention convention);
TokenShape classify_token(const Vocabulary& vocab, std::size_t id);

// Decodes a byte-level BPE token into raw bytes. nullopt when a code point
// lies outside the 256-symbol byte alphabet.
std::optional<std::string> decode_byte_level(std::string_view token);

}  // namespace tokbridge

#endif  // TOKBRIDGE_VOCAB_H_
