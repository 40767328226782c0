#include "synthetic.h"

#include <algorithm>
#include <set>

#include "tokbridge/neighbors.h"

namespace testing_support {

using tokbridge::DictEntry;
using tokbridge::Language;
using tokbridge::LanguageTags;
using tokbridge::SubwordConfig;
using tokbridge::SubwordModel;
using tokbridge::TagVariant;

TempDir::TempDir() {
  std::random_device rd;
  const auto base = fs::temp_directory_path();
  for (int attempt = 0;; ++attempt) {
    path_ = base / ("tokbridge_test_" + std::to_string(rd()) + "_" +
                    std::to_string(attempt));
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string random_word(std::mt19937_64& rng, std::size_t min_len,
                        std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> letter(0, 25);
  std::string word(len(rng), 'a');
  for (char& c : word) c = static_cast<char>('a' + letter(rng));
  return word;
}

std::vector<DictEntry> random_pairs(std::mt19937_64& rng, std::size_t n,
                                    std::size_t min_len, std::size_t max_len) {
  std::set<std::string> used;
  const auto fresh = [&] {
    while (true) {
      std::string w = random_word(rng, min_len, max_len);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<DictEntry> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = fresh();
    std::string t = fresh();
    pairs.push_back({std::move(s), std::move(t), 1});
  }
  return pairs;
}

namespace {

std::string full(const std::string& word, Language lang,
                 const LanguageTags& tags) {
  return tokbridge::tag_word(word, lang, TagVariant::kFull, tags).text;
}

RetrievalResult retrieve(const SubwordModel& model,
                         const std::vector<DictEntry>& candidates,
                         const std::vector<DictEntry>& queries,
                         const LanguageTags& tags) {
  tokbridge::CandidateIndex index(model.config().dim);
  std::vector<std::string> sources;
  for (const auto& entry : candidates) {
    const auto vec = model.embed(full(entry.source_word, Language::kSource, tags));
    if (vec.empty) continue;
    index.add(entry.source_word, vec.values);
    sources.push_back(entry.source_word);
  }
  RetrievalResult result;
  for (const auto& entry : queries) {
    ++result.queries;
    const auto vec = model.embed(full(entry.target_word, Language::kTarget, tags));
    if (vec.empty) continue;
    const auto top = tokbridge::nearest_neighbors(vec.values, index, 3);
    for (std::size_t rank = 0; rank < top.size(); ++rank) {
      if (sources[top[rank].index] != entry.source_word) continue;
      if (rank == 0) ++result.top1;
      ++result.top3;
    }
  }
  return result;
}

}  // namespace

RetrievalResult cross_lingual_retrieval(const SubwordModel& model,
                                        const std::vector<DictEntry>& queries,
                                        const LanguageTags& tags) {
  return retrieve(model, queries, queries, tags);
}

RetrievalResult retrieval_experiment(std::uint64_t seed,
                                     const SubwordConfig& config) {
  std::mt19937_64 rng(seed);
  const auto pairs = random_pairs(rng, 50, 5, 10);
  const tokbridge::Dictionary dict(pairs);
  const auto corpus = tokbridge::generate_bigram_corpus(dict, {false, false, seed});
  SubwordConfig cfg = config;
  cfg.seed = seed;
  const SubwordModel model = tokbridge::train_subword(corpus, cfg);
  return cross_lingual_retrieval(model, pairs);
}

MorphologyData morphology_dictionary(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> source_stems, target_stems, source_suffixes,
      target_suffixes;
  for (int i = 0; i < 10; ++i) source_stems.push_back(random_word(rng, 3, 6));
  for (int i = 0; i < 10; ++i) target_stems.push_back(random_word(rng, 3, 6));
  for (int i = 0; i < 5; ++i) source_suffixes.push_back(random_word(rng, 2, 4));
  for (int i = 0; i < 5; ++i) target_suffixes.push_back(random_word(rng, 2, 4));

  MorphologyData data;
  for (std::size_t stem = 0; stem < 10; ++stem) {
    for (std::size_t suffix = 0; suffix < 5; ++suffix) {
      DictEntry entry{source_stems[stem] + source_suffixes[suffix],
                      target_stems[stem] + target_suffixes[suffix], 1};
      // One inflected form per stem is withheld, each with a different suffix
      // slot.
      if (suffix == stem % 5) {
        data.held_out.push_back(std::move(entry));
      } else {
        data.train.push_back(std::move(entry));
      }
    }
  }
  return data;
}

RetrievalResult generalization_experiment(std::uint64_t seed,
                                          const SubwordConfig& config) {
  const MorphologyData data = morphology_dictionary(seed);
  const LanguageTags tags;
  const tokbridge::Dictionary dict(data.train);
  const auto corpus = tokbridge::generate_bigram_corpus(dict, {false, false, seed});
  SubwordConfig cfg = config;
  cfg.seed = seed;
  const SubwordModel model = tokbridge::train_subword(corpus, cfg);

  // Only held-out pairs whose source side shares a four-gram with a training
  // source word are scored.
  std::set<std::string> train_grams;
  for (const auto& entry : data.train) {
    for (auto& g : tokbridge::extract_ngrams(
             full(entry.source_word, Language::kSource, tags), 4, 4)) {
      train_grams.insert(std::move(g));
    }
  }
  std::vector<DictEntry> scored;
  for (const auto& entry : data.held_out) {
    const auto grams = tokbridge::extract_ngrams(
        full(entry.source_word, Language::kSource, tags), 4, 4);
    if (std::any_of(grams.begin(), grams.end(),
                    [&](const std::string& g) { return train_grams.count(g); })) {
      scored.push_back(entry);
    }
  }
  std::vector<DictEntry> all = data.train;
  all.insert(all.end(), data.held_out.begin(), data.held_out.end());
  return retrieve(model, all, scored, tags);
}

}  // namespace testing_support

namespace testing_support {

using tokbridge::Convention;

std::string mark(const std::string& core, Convention convention,
                 bool word_initial) {
  switch (convention) {
    case Convention::kWordPiece:
      return word_initial ? core : "##" + core;
    case Convention::kBpeByte:
      return word_initial ? "\xC4\xA0" + core : core;
    case Convention::kSentencePiece:
      return word_initial ? "\xE2\x96\x81" + core : core;
    case Convention::kPlain:
      return core;
  }
  return core;
}

tokbridge::Vocabulary random_vocab(std::mt19937_64& rng, Convention convention,
                                   const std::vector<std::string>& words,
                                   std::size_t pieces) {
  static const char* kPunct[] = {",", ".", "!", "?", ";", ":", "(", ")",
                                 "-", "\"", "'", "%", "&", "/"};
  static const char* kSymbols[] = {"\xE2\x82\xAC", "\xE2\x82\xA9", "$", "#",
                                   "\xC2\xA7", "@"};
  std::bernoulli_distribution coin(0.5);
  std::vector<std::string> tokens;
  std::set<std::string> seen;
  const auto add = [&](std::string tok) {
    if (seen.insert(tok).second) tokens.push_back(std::move(tok));
  };

  const tokbridge::RoleTable roles;
  for (const auto role : tokbridge::kAllRoles) {
    if (role != tokbridge::SpecialRole::kUnk && coin(rng)) continue;
    const auto& names = roles.names.at(role);
    add(names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)]);
  }
  for (const char* p : kPunct) {
    if (coin(rng)) add(mark(p, convention, coin(rng)));
  }
  for (const char* s : kSymbols) {
    if (coin(rng)) add(mark(s, convention, true));
  }
  for (int i = 0; i < 6; ++i) {
    add(mark(std::to_string(std::uniform_int_distribution<int>(0, 3000)(rng)),
             convention, coin(rng)));
  }
  for (const auto& w : words) {
    add(mark(w, convention, true));
    if (coin(rng) && coin(rng)) {
      std::string cap = w;
      cap[0] = static_cast<char>(cap[0] - 'a' + 'A');
      add(mark(cap, convention, true));
    }
  }
  for (std::size_t i = 0; i < pieces; ++i) {
    add(mark(random_word(rng, 1, 5), convention,
             convention == Convention::kPlain || coin(rng)));
  }
  if (convention == Convention::kBpeByte) {
    add("\xC3\x83");              // "Ã": lone lead byte 0xC3
    add("\xC3\x83\xC2\xA9");      // "Ã©": bytes of "é"
  } else if (convention == Convention::kSentencePiece) {
    add("<0xC3>");
    add("<0xA9>");
  }
  std::shuffle(tokens.begin(), tokens.end(), rng);
  return tokbridge::Vocabulary(std::move(tokens), convention);
}

MappingFixture random_mapping_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> convention_pick(0, 3);
  const auto source_convention = static_cast<Convention>(convention_pick(rng));
  const auto target_convention = static_cast<Convention>(convention_pick(rng));

  auto pairs = random_pairs(rng, 30, 3, 8);
  std::uniform_int_distribution<std::uint64_t> freq(1, 20);
  for (auto& p : pairs) p.frequency = freq(rng);
  // A few target words with several translations.
  for (int i = 0; i < 5; ++i) {
    pairs.push_back({random_word(rng, 3, 8), pairs[i].target_word, freq(rng)});
  }

  std::vector<std::string> source_words, target_words;
  std::bernoulli_distribution keep(0.7);
  for (const auto& p : pairs) {
    // Some translations are missing from the source vocabulary so the
    // first-token fallback runs.
    if (keep(rng)) source_words.push_back(p.source_word);
    target_words.push_back(p.target_word);
  }
  for (int i = 0; i < 15; ++i) target_words.push_back(random_word(rng, 3, 9));
  for (int i = 0; i < 15; ++i) source_words.push_back(random_word(rng, 3, 9));

  tokbridge::Dictionary dict(pairs);
  tokbridge::SubwordConfig config;
  config.dim = 16;
  config.bucket_count = 4096;
  config.epochs = 3;
  config.seed = seed;
  auto model = tokbridge::train_subword(
      tokbridge::generate_bigram_corpus(dict, {true, false, seed}), config);
  auto source = random_vocab(rng, source_convention, source_words, 40);
  auto target = random_vocab(rng, target_convention, target_words, 40);
  return {std::move(source), std::move(target), std::move(dict), std::move(model)};
}

}  // namespace testing_support
