#ifndef TOKBRIDGE_TOKEN_MAPPER_H_
#define TOKBRIDGE_TOKEN_MAPPER_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokbridge/dictionary.h"
#include "tokbridge/neighbors.h"
#include "tokbridge/subword.h"
#include "tokbridge/vocab.h"

namespace tokbridge {

// Where a candidate came from. For a whole token the same enum names the
// route that resolved it; the first-token fallback only ever labels
// individual candidates of a dictionary-routed token.
enum class Provenance {
  kSpecialRole,
  kSharedExact,
  kDictionary,
  kDictionaryFirstTokenFallback,
  kSubwordFasttext,
  kUnkFallback,
};

std::string_view to_string(Provenance provenance);
std::optional<Provenance> parse_provenance(std::string_view name);

inline constexpr Provenance kRoutes[] = {
    Provenance::kSpecialRole, Provenance::kSharedExact,
    Provenance::kDictionary, Provenance::kSubwordFasttext,
    Provenance::kUnkFallback};

struct MatchCandidate {
  std::size_t source_id = 0;
  double weight = 1.0;
  Provenance provenance = Provenance::kUnkFallback;
  std::optional<double> cosine;

  friend bool operator==(const MatchCandidate&, const MatchCandidate&) = default;
};

struct TokenMatch {
  Provenance route = Provenance::kUnkFallback;
  std::vector<MatchCandidate> candidates;  // descending weight
  std::string query;  // subword query string, when that route ran

  friend bool operator==(const TokenMatch&, const TokenMatch&) = default;
};

// One entry per target token id.
struct TokenMapping {
  std::vector<TokenMatch> tokens;

  std::size_t size() const { return tokens.size(); }
  // Every token has a candidate, weights are positive, non-increasing and
  // sum to 1 within 1e-9, and source ids are below `source_size`.
  void validate(std::size_t source_size) const;

  friend bool operator==(const TokenMapping&, const TokenMapping&) = default;
};

// 30% extra to the best match, 10% extra to the second, 60% spread evenly
// over all n; normalized to sum to one. Throws ValidationError for n == 0.
std::vector<double> compute_weights(std::size_t n);

// Marker-normalized lookups over the source vocabulary.
class SourceLookup {
 public:
  explicit SourceLookup(const Vocabulary& vocab);

  const Vocabulary& vocab() const { return vocab_; }
  const TokenShape& shape(std::size_t id) const { return shapes_[id]; }
  // Lowest non-special id with this (core_text, position); byte-fallback
  // pieces are excluded.
  std::optional<std::size_t> find(std::string_view core,
                                  TokenPosition position) const;
  // Byte-fallback pieces only. Their core_text keeps the raw spelling, so
  // this is exact-string matching within one convention.
  std::optional<std::size_t> find_byte_piece(std::string_view core,
                                             TokenPosition position) const;
  std::optional<std::size_t> find_exact(std::string_view token) const;

 private:
  const Vocabulary& vocab_;
  std::vector<TokenShape> shapes_;
  std::map<std::pair<std::string, TokenPosition>, std::size_t> by_core_;
  std::map<std::pair<std::string, TokenPosition>, std::size_t> by_bytes_;
  std::size_t max_core_bytes_ = 0;

  friend std::vector<std::size_t> greedy_tokenize(std::string_view,
                                                  const SourceLookup&);
};

// Alphabetic, non-special source tokens embedded through the subword model.
struct SemanticIndex {
  CandidateIndex index;
  std::vector<std::size_t> source_ids;  // parallel to index entries
  std::size_t skipped_empty = 0;        // tokens without any n-gram row
};

// Tag-wraps a token for subword lookup: word-initial pieces get the
// language's start tag, continuations none; end tags are never added.
std::string subword_query(const TokenShape& shape, Language language,
                          const LanguageTags& tags);

SemanticIndex build_semantic_index(const SourceLookup& source,
                                   const SubwordModel& model,
                                   const LanguageTags& tags);

// Source tokenizations overriding greedy_tokenize, keyed by word.
using TokenizationOverrides =
    std::unordered_map<std::string, std::vector<std::size_t>>;

// TSV `word<TAB>space-joined source tokens`. Unknown source tokens are a
// ValidationError.
TokenizationOverrides parse_overrides(std::istream& in,
                                      const std::string& source_name,
                                      const Vocabulary& source_vocab);
TokenizationOverrides load_overrides(const std::filesystem::path& path,
                                     const Vocabulary& source_vocab);

// Longest-match-first segmentation; the first piece must be word-initial,
// later ones continuations. Unmatched code points become unk.
std::vector<std::size_t> greedy_tokenize(std::string_view word,
                                         const SourceLookup& source);

// Dictionary grouped by target word, translations in descending frequency.
class TranslationIndex {
 public:
  explicit TranslationIndex(const Dictionary& dict);

  struct Translation {
    std::string source_word;
    std::uint64_t frequency;
  };

  const std::vector<Translation>* exact(std::string_view target_word) const;
  const std::vector<Translation>* folded(std::string_view target_word) const;

 private:
  static void sort(std::unordered_map<std::string, std::vector<Translation>>&);

  std::unordered_map<std::string, std::vector<Translation>> exact_;
  std::unordered_map<std::string, std::vector<Translation>> folded_;
};

struct MapperConfig {
  std::size_t k_max = 5;       // dictionary translations kept
  std::size_t k = 3;           // subword neighbors retrieved
  bool case_insensitive_retry = true;
  unsigned threads = 1;
  LanguageTags tags;
};

MatchCandidate match_shared(const TokenShape& shape,
                            const SourceLookup& source);

std::optional<std::vector<MatchCandidate>> match_dictionary(
    const TokenShape& shape, const TranslationIndex& translations,
    const SourceLookup& source, const MapperConfig& config,
    const TokenizationOverrides* overrides = nullptr);

// Falls back to the source unk token when the query has no n-gram rows or
// the index is empty. `query_out` receives the query string.
std::vector<MatchCandidate> match_subword(const TokenShape& shape,
                                          const SubwordModel& model,
                                          const SemanticIndex& index,
                                          const SourceLookup& source,
                                          const MapperConfig& config,
                                          std::string* query_out = nullptr);

TokenMapping build_mapping(const Vocabulary& target_vocab,
                           const Vocabulary& source_vocab,
                           const Dictionary& dict, const SubwordModel& model,
                           const MapperConfig& config,
                           const TokenizationOverrides* overrides = nullptr);

// JSON lines, one record per target token.
void write_mapping(const TokenMapping& mapping, const Vocabulary& target_vocab,
                   const Vocabulary& source_vocab, std::ostream& out);
void save_mapping(const TokenMapping& mapping, const Vocabulary& target_vocab,
                  const Vocabulary& source_vocab,
                  const std::filesystem::path& path);

struct LoadedMapping {
  TokenMapping mapping;
  std::vector<std::string> target_tokens;
  std::map<std::size_t, std::string> source_tokens;
};

LoadedMapping read_mapping(std::istream& in, const std::string& source_name);
LoadedMapping load_mapping(const std::filesystem::path& path);

}  // namespace tokbridge

#endif  // TOKBRIDGE_TOKEN_MAPPER_H_
