#include "tokbridge/token_mapper.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tokbridge/error.h"
#include "tokbridge/utf8.h"

namespace tokbridge {
namespace {

using OrderedJson = nlohmann::ordered_json;

MatchCandidate unk_candidate(const SourceLookup& source) {
  return {source.vocab().unk_id(), 1.0, Provenance::kUnkFallback, std::nullopt};
}

TokenMatch map_token(std::size_t id, const Vocabulary& target_vocab,
                     const SourceLookup& source,
                     const TranslationIndex& translations,
                     const SubwordModel& model, const SemanticIndex& semantic,
                     const MapperConfig& config,
                     const TokenizationOverrides* overrides) {
  const TokenShape shape = classify_token(target_vocab, id);
  TokenMatch match;

  if (shape.special) {
    const auto role = *target_vocab.role_of(id);
    if (const auto src = source.vocab().special(role)) {
      match.route = Provenance::kSpecialRole;
      match.candidates.push_back(
          {*src, 1.0, Provenance::kSpecialRole, std::nullopt});
    } else {
      match.route = Provenance::kUnkFallback;
      match.candidates.push_back(unk_candidate(source));
    }
    return match;
  }

  if (!shape.alphabetic) {
    MatchCandidate candidate = match_shared(shape, source);
    match.route = candidate.provenance;
    match.candidates.push_back(candidate);
    return match;
  }

  if (auto dict = match_dictionary(shape, translations, source, config,
                                   overrides)) {
    match.route = Provenance::kDictionary;
    match.candidates = std::move(*dict);
    return match;
  }

  match.candidates =
      match_subword(shape, model, semantic, source, config, &match.query);
  match.route = match.candidates.front().provenance;
  return match;
}

}  // namespace

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kSpecialRole: return "special_role";
    case Provenance::kSharedExact: return "shared_exact";
    case Provenance::kDictionary: return "dictionary";
    case Provenance::kDictionaryFirstTokenFallback:
      return "dictionary_first_token_fallback";
    case Provenance::kSubwordFasttext: return "subword_fasttext";
    case Provenance::kUnkFallback: return "unk_fallback";
  }
  return "?";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  for (Provenance p :
       {Provenance::kSpecialRole, Provenance::kSharedExact,
        Provenance::kDictionary, Provenance::kDictionaryFirstTokenFallback,
        Provenance::kSubwordFasttext, Provenance::kUnkFallback}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

void TokenMapping::validate(std::size_t source_size) const {
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto& candidates = tokens[t].candidates;
    const std::string field = "target_id " + std::to_string(t);
    if (candidates.empty()) throw ValidationError(field, "no candidates");
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      if (c.source_id >= source_size) {
        throw ValidationError(field, "source id " + std::to_string(c.source_id) +
                                         " out of range");
      }
      if (!(c.weight > 0.0)) throw ValidationError(field, "non-positive weight");
      if (i > 0 && c.weight > candidates[i - 1].weight) {
        throw ValidationError(field, "weights not in descending order");
      }
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError(field, "weights sum to " + std::to_string(sum));
    }
  }
}

std::vector<double> compute_weights(std::size_t n) {
  if (n == 0) throw ValidationError("n", "need at least one candidate");
  // Integer shares in units of 1/(10n): 6 each, +3n to the first and +n to
  // the second. Dividing the integers once keeps common cases exact.
  std::vector<double> shares(n, 6.0);
  shares[0] += 3.0 * static_cast<double>(n);
  if (n > 1) shares[1] += static_cast<double>(n);
  double total = 0.0;
  for (double s : shares) total += s;
  for (double& s : shares) s /= total;
  return shares;
}

SourceLookup::SourceLookup(const Vocabulary& vocab) : vocab_(vocab) {
  shapes_.reserve(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    shapes_.push_back(classify_token(vocab, id));
    const TokenShape& shape = shapes_.back();
    if (shape.special || shape.core_text.empty()) continue;
    if (shape.byte_fallback) {
      by_bytes_.emplace(std::make_pair(shape.core_text, shape.position), id);
      continue;
    }
    by_core_.emplace(std::make_pair(shape.core_text, shape.position), id);
    max_core_bytes_ = std::max(max_core_bytes_, shape.core_text.size());
  }
}

std::optional<std::size_t> SourceLookup::find(std::string_view core,
                                              TokenPosition position) const {
  const auto it = by_core_.find(std::make_pair(std::string(core), position));
  if (it == by_core_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> SourceLookup::find_byte_piece(
    std::string_view core, TokenPosition position) const {
  const auto it = by_bytes_.find(std::make_pair(std::string(core), position));
  if (it == by_bytes_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> SourceLookup::find_exact(
    std::string_view token) const {
  const auto id = vocab_.find(token);
  if (!id || vocab_.is_special(*id)) return std::nullopt;
  return id;
}

std::string subword_query(const TokenShape& shape, Language language,
                          const LanguageTags& tags) {
  if (shape.position == TokenPosition::kWordInitial) {
    return tags.start(language) + shape.core_text;
  }
  return shape.core_text;
}

SemanticIndex build_semantic_index(const SourceLookup& source,
                                   const SubwordModel& model,
                                   const LanguageTags& tags) {
  SemanticIndex semantic{CandidateIndex(model.config().dim), {}, 0};
  for (std::size_t id = 0; id < source.vocab().size(); ++id) {
    const TokenShape& shape = source.shape(id);
    if (shape.special || !shape.alphabetic) continue;
    const WordVector vec =
        model.embed(subword_query(shape, Language::kSource, tags));
    const bool zero = std::all_of(vec.values.begin(), vec.values.end(),
                                  [](float v) { return v == 0.0f; });
    if (vec.empty || zero) {
      ++semantic.skipped_empty;
      continue;
    }
    semantic.index.add(source.vocab().token(id), vec.values);
    semantic.source_ids.push_back(id);
  }
  return semantic;
}

TokenizationOverrides parse_overrides(std::istream& in,
                                      const std::string& source_name,
                                      const Vocabulary& source_vocab) {
  TokenizationOverrides overrides;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(source_name, line_no, "expected word<TAB>tokens");
    }
    std::vector<std::size_t> ids;
    std::istringstream pieces(line.substr(tab + 1));
    std::string piece;
    while (pieces >> piece) {
      const auto id = source_vocab.find(piece);
      if (!id) {
        throw ValidationError(piece, source_name + ":" + std::to_string(line_no) +
                                         ": unknown source token \"" + piece +
                                         "\"");
      }
      ids.push_back(*id);
    }
    if (ids.empty()) throw ParseError(source_name, line_no, "no tokens");
    overrides[line.substr(0, tab)] = std::move(ids);
  }
  return overrides;
}

TokenizationOverrides load_overrides(const std::filesystem::path& path,
                                     const Vocabulary& source_vocab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tokenization sidecar " + path.string());
  return parse_overrides(in, path.string(), source_vocab);
}

std::vector<std::size_t> greedy_tokenize(std::string_view word,
                                         const SourceLookup& source) {
  const auto bounds = utf8::boundaries(word);
  std::vector<std::size_t> ids;
  std::size_t start = 0;  // index into bounds
  while (start + 1 < bounds.size()) {
    const TokenPosition position = ids.empty() ? TokenPosition::kWordInitial
                                               : TokenPosition::kContinuation;
    std::optional<std::size_t> hit;
    std::size_t hit_end = start + 1;
    for (std::size_t end = bounds.size() - 1; end > start; --end) {
      const std::size_t bytes = bounds[end] - bounds[start];
      if (bytes > source.max_core_bytes_) continue;
      hit = source.find(word.substr(bounds[start], bytes), position);
      if (hit) {
        hit_end = end;
        break;
      }
    }
    ids.push_back(hit ? *hit : source.vocab().unk_id());
    start = hit_end;
  }
  return ids;
}

TranslationIndex::TranslationIndex(const Dictionary& dict) {
  const auto add = [](auto& map, const std::string& key,
                      const DictEntry& entry) {
    auto& list = map[key];
    for (auto& t : list) {
      if (t.source_word == entry.source_word) {
        t.frequency += entry.frequency;
        return;
      }
    }
    list.push_back({entry.source_word, entry.frequency});
  };
  for (const auto& entry : dict.entries()) {
    add(exact_, entry.target_word, entry);
    add(folded_, utf8::to_lower(entry.target_word), entry);
  }
  sort(exact_);
  sort(folded_);
}

void TranslationIndex::sort(
    std::unordered_map<std::string, std::vector<Translation>>& map) {
  for (auto& [word, list] : map) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Translation& a, const Translation& b) {
                       return a.frequency > b.frequency;
                     });
  }
}

const std::vector<TranslationIndex::Translation>* TranslationIndex::exact(
    std::string_view target_word) const {
  const auto it = exact_.find(std::string(target_word));
  return it == exact_.end() ? nullptr : &it->second;
}

const std::vector<TranslationIndex::Translation>* TranslationIndex::folded(
    std::string_view target_word) const {
  const auto it = folded_.find(utf8::to_lower(target_word));
  return it == folded_.end() ? nullptr : &it->second;
}

MatchCandidate match_shared(const TokenShape& shape,
                            const SourceLookup& source) {
  std::optional<std::size_t> hit;
  if (shape.byte_fallback) {
    hit = source.find_byte_piece(shape.core_text, shape.position);
  } else if (!shape.core_text.empty()) {
    hit = source.find(shape.core_text, shape.position);
  }
  if (!hit) return unk_candidate(source);
  return {*hit, 1.0, Provenance::kSharedExact, std::nullopt};
}

std::optional<std::vector<MatchCandidate>> match_dictionary(
    const TokenShape& shape, const TranslationIndex& translations,
    const SourceLookup& source, const MapperConfig& config,
    const TokenizationOverrides* overrides) {
  if (!shape.alphabetic || shape.position != TokenPosition::kWordInitial) {
    return std::nullopt;
  }
  const auto* list = translations.exact(shape.core_text);
  if (!list && config.case_insensitive_retry) {
    list = translations.folded(shape.core_text);
  }
  if (!list || list->empty() || config.k_max == 0) return std::nullopt;

  const std::size_t n = std::min(list->size(), config.k_max);
  const auto weights = compute_weights(n);
  std::vector<MatchCandidate> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& word = (*list)[i].source_word;
    if (auto id = source.find(word, TokenPosition::kWordInitial)) {
      candidates.push_back({*id, weights[i], Provenance::kDictionary, std::nullopt});
      continue;
    }
    std::optional<std::size_t> first;
    if (overrides) {
      if (const auto it = overrides->find(word); it != overrides->end()) {
        first = it->second.front();
      }
    }
    if (!first) first = greedy_tokenize(word, source).front();
    candidates.push_back({*first, weights[i],
                          Provenance::kDictionaryFirstTokenFallback,
                          std::nullopt});
  }
  return candidates;
}

std::vector<MatchCandidate> match_subword(const TokenShape& shape,
                                          const SubwordModel& model,
                                          const SemanticIndex& index,
                                          const SourceLookup& source,
                                          const MapperConfig& config,
                                          std::string* query_out) {
  const std::string query =
      subword_query(shape, Language::kTarget, config.tags);
  if (query_out) *query_out = query;
  const WordVector vec = model.embed(query);
  const bool zero = std::all_of(vec.values.begin(), vec.values.end(),
                                [](float v) { return v == 0.0f; });
  if (vec.empty || zero || index.index.empty() || config.k == 0) {
    return {unk_candidate(source)};
  }
  const auto neighbors = nearest_neighbors(vec.values, index.index, config.k);
  const auto weights = compute_weights(neighbors.size());
  std::vector<MatchCandidate> candidates;
  candidates.reserve(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    candidates.push_back({index.source_ids[neighbors[i].index], weights[i],
                          Provenance::kSubwordFasttext, neighbors[i].cosine});
  }
  return candidates;
}

TokenMapping build_mapping(const Vocabulary& target_vocab,
                           const Vocabulary& source_vocab,
                           const Dictionary& dict, const SubwordModel& model,
                           const MapperConfig& config,
                           const TokenizationOverrides* overrides) {
  config.tags.validate();
  const SourceLookup source(source_vocab);
  const TranslationIndex translations(dict);
  const SemanticIndex semantic =
      build_semantic_index(source, model, config.tags);

  TokenMapping mapping;
  mapping.tokens.resize(target_vocab.size());
  const unsigned threads = std::max(1u, config.threads);
  const auto lane = [&](unsigned t) {
    for (std::size_t id = t; id < target_vocab.size(); id += threads) {
      mapping.tokens[id] = map_token(id, target_vocab, source, translations,
                                     model, semantic, config, overrides);
    }
  };
  if (threads == 1) {
    lane(0);
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) workers.emplace_back(lane, t);
    for (auto& w : workers) w.join();
  }
  return mapping;
}

void write_mapping(const TokenMapping& mapping, const Vocabulary& target_vocab,
                   const Vocabulary& source_vocab, std::ostream& out) {
  if (mapping.size() != target_vocab.size()) {
    throw ValidationError("mapping", "mapping covers " +
                                         std::to_string(mapping.size()) +
                                         " tokens, target vocabulary has " +
                                         std::to_string(target_vocab.size()));
  }
  for (std::size_t t = 0; t < mapping.size(); ++t) {
    const TokenMatch& match = mapping.tokens[t];
    OrderedJson record;
    record["target_id"] = t;
    record["target_token"] = target_vocab.token(t);
    record["case"] = to_string(match.route);
    OrderedJson candidates = OrderedJson::array();
    for (const auto& c : match.candidates) {
      OrderedJson item;
      item["source_id"] = c.source_id;
      item["source_token"] = source_vocab.token(c.source_id);
      item["weight"] = c.weight;
      item["provenance"] = to_string(c.provenance);
      if (c.cosine) item["cosine"] = *c.cosine;
      candidates.push_back(std::move(item));
    }
    record["candidates"] = std::move(candidates);
    if (!match.query.empty()) record["query"] = match.query;
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("mapping write failed");
}

void save_mapping(const TokenMapping& mapping, const Vocabulary& target_vocab,
                  const Vocabulary& source_vocab,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create mapping " + path.string());
  write_mapping(mapping, target_vocab, source_vocab, out);
}

LoadedMapping read_mapping(std::istream& in, const std::string& source_name) {
  LoadedMapping loaded;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      const auto target_id = record.at("target_id").get<std::size_t>();
      if (target_id != loaded.mapping.tokens.size()) {
        throw ParseError(source_name, line_no,
                         "records must be ordered by target_id");
      }
      TokenMatch match;
      const auto route = parse_provenance(record.at("case").get<std::string>());
      if (!route) throw ParseError(source_name, line_no, "unknown case");
      match.route = *route;
      if (record.contains("query")) match.query = record["query"].get<std::string>();
      for (const auto& item : record.at("candidates")) {
        MatchCandidate c;
        c.source_id = item.at("source_id").get<std::size_t>();
        c.weight = item.at("weight").get<double>();
        const auto prov = item.contains("provenance")
                              ? parse_provenance(item["provenance"].get<std::string>())
                              : route;
        if (!prov) throw ParseError(source_name, line_no, "unknown provenance");
        c.provenance = *prov;
        if (item.contains("cosine")) c.cosine = item["cosine"].get<double>();
        loaded.source_tokens[c.source_id] =
            item.at("source_token").get<std::string>();
        match.candidates.push_back(c);
      }
      loaded.target_tokens.push_back(record.at("target_token").get<std::string>());
      loaded.mapping.tokens.push_back(std::move(match));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return loaded;
}

LoadedMapping load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mapping " + path.string());
  return read_mapping(in, path.string());
}

}  // namespace tokbridge
