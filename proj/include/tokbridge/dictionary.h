#ifndef TOKBRIDGE_DICTIONARY_H_
#define TOKBRIDGE_DICTIONARY_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tokbridge {

enum class Language { kSource, kTarget };

// Which of the two language tags wrap a word.
enum class TagVariant { kFull, kNoStartTag, kNoEndTag };

// Sentinel characters marking language identity inside the shared subword
// space. Each must be a single code point.
struct LanguageTags {
  std::string source_start = "\xEE\x80\x80";  // U+E000
  std::string source_end = "\xEE\x80\x81";    // U+E001
  std::string target_start = "\xEE\x80\x82";  // U+E002
  std::string target_end = "\xEE\x80\x83";    // U+E003

  const std::string& start(Language lang) const {
    return lang == Language::kSource ? source_start : target_start;
  }
  const std::string& end(Language lang) const {
    return lang == Language::kSource ? source_end : target_end;
  }

  // Throws ValidationError unless all four are distinct single code points
  // that are neither whitespace nor the n-gram boundary characters.
  void validate() const;
  bool contains_sentinel(std::string_view word) const;
};

struct DictEntry {
  std::string source_word;
  std::string target_word;
  std::uint64_t frequency = 1;

  friend bool operator==(const DictEntry&, const DictEntry&) = default;
};

// Ordered bilingual word list. Duplicate (source, target) pairs are merged
// at load time, keeping the position of the first occurrence.
class Dictionary {
 public:
  Dictionary() = default;
  // Validates every entry and merges duplicates.
  explicit Dictionary(std::vector<DictEntry> entries,
                      const LanguageTags& tags = {});

  const std::vector<DictEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<DictEntry> entries_;
};

// Parses `source<TAB>target[<TAB>frequency]` lines; '#' lines and blank
// lines are skipped. `source_name` labels errors.
Dictionary parse_dictionary(std::istream& in, const std::string& source_name,
                            const LanguageTags& tags = {});
Dictionary load_dictionary(const std::filesystem::path& path,
                           const LanguageTags& tags = {});

struct TaggedWord {
  std::string text;
  Language language;
  TagVariant variant;
};

TaggedWord tag_word(std::string_view word, Language language,
                    TagVariant variant, const LanguageTags& tags = {});

struct BigramPair {
  std::string left;
  std::string right;

  friend bool operator==(const BigramPair&, const BigramPair&) = default;
  friend auto operator<=>(const BigramPair&, const BigramPair&) = default;
};

struct CorpusOptions {
  bool augment_compounds = false;
  bool frequency_weighted = false;
  std::uint64_t seed = 0;
};

class BigramCorpus {
 public:
  BigramCorpus() = default;
  explicit BigramCorpus(std::vector<BigramPair> lines)
      : lines_(std::move(lines)) {}

  const std::vector<BigramPair>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  bool empty() const { return lines_.empty(); }

  // One "left right" pair per line, LF terminated.
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static BigramCorpus read(std::istream& in, const std::string& source_name);
  static BigramCorpus load(const std::filesystem::path& path);

 private:
  std::vector<BigramPair> lines_;
};

// Emits the symmetric bigram corpus: for every entry (s, t) the lines
// (s s), (s t), (t s), (t t) over fully tagged forms. With compound
// augmentation each tag-dropped form of s is additionally paired with t in
// both orders, and each tag-dropped form of t with s, so the corpus stays
// swap-symmetric and triples in size. Lines are shuffled under `seed`.
BigramCorpus generate_bigram_corpus(const Dictionary& dict,
                                    const CorpusOptions& options,
                                    const LanguageTags& tags = {});

}  // namespace tokbridge

#endif  // TOKBRIDGE_DICTIONARY_H_
