#include "tokbridge/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "tokbridge/error.h"

namespace tokbridge {
namespace {

std::string format_number(double value, const char* spec = "%.4g") {
  char buf[32];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

double entropy(const TokenMatch& match) {
  double h = 0.0;
  for (const auto& c : match.candidates) {
    if (c.weight > 0.0) h -= c.weight * std::log(c.weight);
  }
  return h;
}

std::string render_line(const TokenMatch& match, std::size_t target_id,
                        const Vocabulary& target_vocab,
                        const Vocabulary& source_vocab) {
  std::string line = "E_t[" + target_vocab.token(target_id) + "] = ";
  for (std::size_t i = 0; i < match.candidates.size(); ++i) {
    const auto& c = match.candidates[i];
    if (i > 0) line += " + ";
    line += format_number(c.weight) + "\xC2\xB7" + "E_s[" +
            source_vocab.token(c.source_id) + "]";
  }
  return line;
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("values", "no values");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

MappingStats summarize(const TokenMapping& mapping,
                       const Vocabulary& target_vocab,
                       const Vocabulary& source_vocab) {
  if (mapping.size() != target_vocab.size()) {
    throw ValidationError("mapping", "mapping does not cover the target vocabulary");
  }
  mapping.validate(source_vocab.size());

  MappingStats stats;
  stats.total = mapping.size();
  for (Provenance route : kRoutes) stats.route_counts[route] = 0;

  std::vector<double> top1;
  for (std::size_t t = 0; t < mapping.size(); ++t) {
    const TokenMatch& match = mapping.tokens[t];
    ++stats.route_counts[match.route];
    const TokenShape shape = classify_token(target_vocab, t);
    if (shape.alphabetic && !shape.special) ++stats.alphabetic_tokens;
    for (const auto& c : match.candidates) {
      if (c.provenance == Provenance::kDictionaryFirstTokenFallback) {
        ++stats.first_token_fallback_candidates;
      }
    }
    if (match.route == Provenance::kSubwordFasttext &&
        match.candidates.front().cosine) {
      top1.push_back(*match.candidates.front().cosine);
    }
  }
  stats.unk_fallback = stats.route_counts[Provenance::kUnkFallback];
  if (stats.alphabetic_tokens > 0) {
    stats.dictionary_coverage =
        static_cast<double>(stats.route_counts[Provenance::kDictionary]) /
        static_cast<double>(stats.alphabetic_tokens);
  }
  if (!top1.empty()) {
    CosineSummary summary;
    double sum = 0.0;
    for (double v : top1) sum += v;
    summary.mean = sum / static_cast<double>(top1.size());
    summary.p10 = percentile(top1, 10);
    summary.p50 = percentile(top1, 50);
    summary.p90 = percentile(top1, 90);
    stats.subword_top1 = summary;
  }
  return stats;
}

nlohmann::ordered_json stats_to_json(const MappingStats& stats) {
  nlohmann::ordered_json out;
  out["total"] = stats.total;
  nlohmann::ordered_json routes;
  for (const auto& [route, count] : stats.route_counts) {
    routes[std::string(to_string(route))] = count;
  }
  out["routes"] = std::move(routes);
  out["alphabetic_tokens"] = stats.alphabetic_tokens;
  out["dictionary_coverage"] = stats.dictionary_coverage;
  out["first_token_fallback_candidates"] = stats.first_token_fallback_candidates;
  out["unk_fallback"] = stats.unk_fallback;
  if (stats.subword_top1) {
    out["subword_top1_cosine"] = {{"mean", stats.subword_top1->mean},
                                  {"p10", stats.subword_top1->p10},
                                  {"p50", stats.subword_top1->p50},
                                  {"p90", stats.subword_top1->p90}};
  } else {
    out["subword_top1_cosine"] = nullptr;
  }
  return out;
}

std::string render_stats(const MappingStats& stats) {
  std::ostringstream out;
  out << "## Mapping summary\n\n"
      << "| route | tokens |\n|---|---:|\n";
  for (const auto& [route, count] : stats.route_counts) {
    out << "| " << to_string(route) << " | " << count << " |\n";
  }
  out << "| total | " << stats.total << " |\n\n";
  out << "- alphabetic tokens: " << stats.alphabetic_tokens << "\n"
      << "- dictionary coverage: "
      << format_number(stats.dictionary_coverage, "%.4f") << "\n"
      << "- first-token fallback candidates: "
      << stats.first_token_fallback_candidates << "\n"
      << "- unk fallback: " << stats.unk_fallback << "\n";
  if (stats.subword_top1) {
    const auto& s = *stats.subword_top1;
    out << "- subword top-1 cosine: mean " << format_number(s.mean, "%.4f")
        << ", p10 " << format_number(s.p10, "%.4f") << ", p50 "
        << format_number(s.p50, "%.4f") << ", p90 "
        << format_number(s.p90, "%.4f") << "\n";
  }
  return out.str();
}

std::string render_examples(const TokenMapping& mapping,
                            const Vocabulary& target_vocab,
                            const Vocabulary& source_vocab,
                            std::size_t n_per_case, std::uint64_t seed) {
  std::ostringstream out;
  for (Provenance route : kRoutes) {
    std::vector<std::size_t> members;
    for (std::size_t t = 0; t < mapping.size(); ++t) {
      if (mapping.tokens[t].route == route) members.push_back(t);
    }
    if (members.empty()) continue;

    out << "### " << to_string(route) << " (" << members.size()
        << " tokens)\n\n";
    if (n_per_case == 0) continue;

    std::vector<double> h(mapping.size(), 0.0);
    for (std::size_t t : members) h[t] = entropy(mapping.tokens[t]);
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });

    std::vector<std::size_t> picks;
    if (members.size() <= n_per_case) {
      picks = members;
    } else {
      std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(route) + 1) *
                                     0x9E3779B97F4A7C15ull);
      for (std::size_t s = 0; s < n_per_case; ++s) {
        const std::size_t lo = members.size() * s / n_per_case;
        const std::size_t hi = members.size() * (s + 1) / n_per_case;
        std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
        picks.push_back(members[pick(rng)]);
      }
    }
    for (std::size_t t : picks) {
      out << "- " << render_line(mapping.tokens[t], t, target_vocab, source_vocab)
          << "\n";
    }
    out << "\n";
  }
  return out.str();
}

void write_mapping_tsv(const TokenMapping& mapping,
                       const Vocabulary& target_vocab,
                       const Vocabulary& source_vocab, std::ostream& out) {
  out << "target_id\ttarget_token\tcase\tcandidates\n";
  for (std::size_t t = 0; t < mapping.size(); ++t) {
    out << t << '\t' << target_vocab.token(t) << '\t'
        << to_string(mapping.tokens[t].route) << '\t';
    const auto& candidates = mapping.tokens[t].candidates;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (i > 0) out << ' ';
      out << source_vocab.token(candidates[i].source_id) << ':'
          << format_number(candidates[i].weight);
    }
    out << '\n';
  }
}

void write_neighbor_dump(const TokenMapping& mapping,
                         const Vocabulary& target_vocab,
                         const Vocabulary& source_vocab, std::ostream& out) {
  out << "target_id\ttarget_token\tquery\trank\tsource_token\tcosine\n";
  for (std::size_t t = 0; t < mapping.size(); ++t) {
    const TokenMatch& match = mapping.tokens[t];
    if (match.route != Provenance::kSubwordFasttext) continue;
    for (std::size_t i = 0; i < match.candidates.size(); ++i) {
      const auto& c = match.candidates[i];
      out << t << '\t' << target_vocab.token(t) << '\t' << match.query << '\t'
          << i + 1 << '\t' << source_vocab.token(c.source_id) << '\t'
          << format_number(c.cosine.value_or(0.0), "%.6f") << '\n';
    }
  }
}

}  // namespace tokbridge
