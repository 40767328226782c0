#include "tokbridge/dictionary.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tokbridge/error.h"
#include "tokbridge/utf8.h"

namespace tokbridge {
namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) {
    return c != ' ' && c != '\t' && c != '\r' && c != '\n';
  };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

void validate_word(std::string_view word, std::string_view role,
                   const LanguageTags& tags) {
  const std::string field(role);
  if (word.empty()) throw ValidationError(field, "empty word");
  if (!utf8::is_valid(word)) {
    throw ValidationError(field, "invalid UTF-8 in \"" + std::string(word) + "\"");
  }
  if (utf8::contains_whitespace(word)) {
    throw ValidationError(field, "whitespace in \"" + std::string(word) + "\"");
  }
  if (tags.contains_sentinel(word)) {
    throw ValidationError(field, "tag sentinel in \"" + std::string(word) + "\"");
  }
}

}  // namespace

void LanguageTags::validate() const {
  const std::string* all[] = {&source_start, &source_end, &target_start,
                              &target_end};
  std::set<std::string> seen;
  for (const std::string* tag : all) {
    if (tag->empty() || utf8::length(*tag) != 1 || !utf8::is_valid(*tag)) {
      throw ValidationError("tags", "tag \"" + *tag +
                                        "\" is not a single code point");
    }
    if (*tag == "<" || *tag == ">" || utf8::contains_whitespace(*tag)) {
      throw ValidationError("tags", "tag \"" + *tag + "\" is reserved");
    }
    if (!seen.insert(*tag).second) {
      throw ValidationError("tags", "tag \"" + *tag + "\" used twice");
    }
  }
}

bool LanguageTags::contains_sentinel(std::string_view word) const {
  for (const std::string* tag :
       {&source_start, &source_end, &target_start, &target_end}) {
    if (word.find(*tag) != std::string_view::npos) return true;
  }
  return false;
}

Dictionary::Dictionary(std::vector<DictEntry> entries,
                       const LanguageTags& tags) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (auto& entry : entries) {
    validate_word(entry.source_word, "source_word", tags);
    validate_word(entry.target_word, "target_word", tags);
    auto key = std::make_pair(entry.source_word, entry.target_word);
    auto [it, inserted] = index.emplace(std::move(key), entries_.size());
    if (inserted) {
      entries_.push_back(std::move(entry));
    } else {
      entries_[it->second].frequency += entry.frequency;
    }
  }
}

Dictionary parse_dictionary(std::istream& in, const std::string& source_name,
                            const LanguageTags& tags) {
  std::vector<DictEntry> entries;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;

    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(source_name, line_no,
                       "expected 2 or 3 tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    DictEntry entry;
    entry.source_word = std::string(trim(fields[0]));
    entry.target_word = std::string(trim(fields[1]));
    if (entry.source_word.empty() || entry.target_word.empty()) {
      throw ParseError(source_name, line_no, "empty word");
    }
    if (fields.size() == 3) {
      const std::string_view freq = trim(fields[2]);
      const auto [ptr, ec] = std::from_chars(
          freq.data(), freq.data() + freq.size(), entry.frequency);
      if (ec != std::errc() || ptr != freq.data() + freq.size()) {
        throw ParseError(source_name, line_no,
                         "bad frequency \"" + std::string(freq) + "\"");
      }
    }
    try {
      validate_word(entry.source_word, "source_word", tags);
      validate_word(entry.target_word, "target_word", tags);
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), source_name + ":" +
                                           std::to_string(line_no) + ": " +
                                           e.what());
    }
    entries.push_back(std::move(entry));
  }
  return Dictionary(std::move(entries), tags);
}

Dictionary load_dictionary(const std::filesystem::path& path,
                           const LanguageTags& tags) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dictionary " + path.string());
  return parse_dictionary(in, path.string(), tags);
}

TaggedWord tag_word(std::string_view word, Language language,
                    TagVariant variant, const LanguageTags& tags) {
  TaggedWord tagged{{}, language, variant};
  if (variant != TagVariant::kNoStartTag) tagged.text += tags.start(language);
  tagged.text += word;
  if (variant != TagVariant::kNoEndTag) tagged.text += tags.end(language);
  return tagged;
}

void BigramCorpus::write(std::ostream& out) const {
  for (const auto& line : lines_) {
    out << line.left << ' ' << line.right << '\n';
  }
  if (!out) throw IoError("corpus write failed");
}

void BigramCorpus::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create corpus " + path.string());
  write(out);
}

BigramCorpus BigramCorpus::read(std::istream& in,
                                const std::string& source_name) {
  std::vector<BigramPair> lines;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.empty()) continue;
    const std::size_t space = raw.find(' ');
    if (space == std::string::npos || space == 0 ||
        space + 1 == raw.size() ||
        raw.find(' ', space + 1) != std::string::npos) {
      throw ParseError(source_name, line_no,
                       "expected exactly two space-separated tokens");
    }
    lines.push_back({raw.substr(0, space), raw.substr(space + 1)});
  }
  return BigramCorpus(std::move(lines));
}

BigramCorpus BigramCorpus::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return read(in, path.string());
}

BigramCorpus generate_bigram_corpus(const Dictionary& dict,
                                    const CorpusOptions& options,
                                    const LanguageTags& tags) {
  if (dict.empty()) throw ValidationError("dictionary", "dictionary is empty");
  tags.validate();

  std::vector<BigramPair> lines;
  const std::size_t per_entry = options.augment_compounds ? 12 : 4;
  lines.reserve(dict.size() * per_entry);

  for (const auto& entry : dict.entries()) {
    const std::uint64_t copies =
        options.frequency_weighted ? entry.frequency : 1;
    const auto full = [&](std::string_view w, Language lang) {
      return tag_word(w, lang, TagVariant::kFull, tags).text;
    };
    const std::string s = full(entry.source_word, Language::kSource);
    const std::string t = full(entry.target_word, Language::kTarget);

    std::vector<BigramPair> block = {{s, s}, {s, t}, {t, s}, {t, t}};
    if (options.augment_compounds) {
      for (TagVariant variant : {TagVariant::kNoStartTag, TagVariant::kNoEndTag}) {
        const std::string sv =
            tag_word(entry.source_word, Language::kSource, variant, tags).text;
        const std::string tv =
            tag_word(entry.target_word, Language::kTarget, variant, tags).text;
        block.push_back({sv, t});
        block.push_back({t, sv});
        block.push_back({tv, s});
        block.push_back({s, tv});
      }
    }
    for (std::uint64_t c = 0; c < copies; ++c) {
      lines.insert(lines.end(), block.begin(), block.end());
    }
  }

  std::mt19937_64 rng(options.seed);
  std::shuffle(lines.begin(), lines.end(), rng);
  return BigramCorpus(std::move(lines));
}

}  // namespace tokbridge
