#ifndef TOKBRIDGE_REPORT_H_
#define TOKBRIDGE_REPORT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokbridge/token_mapper.h"
#include "tokbridge/vocab.h"

namespace tokbridge {

struct CosineSummary {
  double mean = 0.0;
  double p10 = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

struct MappingStats {
  std::size_t total = 0;
  std::map<Provenance, std::size_t> route_counts;  // every route, zero-filled
  std::size_t alphabetic_tokens = 0;  // non-special tokens with a letter
  double dictionary_coverage = 0.0;   // dictionary route / alphabetic tokens
  std::size_t first_token_fallback_candidates = 0;
  std::size_t unk_fallback = 0;
  std::optional<CosineSummary> subword_top1;
};

MappingStats summarize(const TokenMapping& mapping,
                       const Vocabulary& target_vocab,
                       const Vocabulary& source_vocab);

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double percentile(std::vector<double> values, double p);

nlohmann::ordered_json stats_to_json(const MappingStats& stats);
std::string render_stats(const MappingStats& stats);

// Markdown sections per route with up to `n_per_case` examples laid out as
// "E_t[tok] = 0.5·E_s[a] + ...". Samples are seeded and stratified by
// weight entropy, highest first. Routes without tokens are omitted.
std::string render_examples(const TokenMapping& mapping,
                            const Vocabulary& target_vocab,
                            const Vocabulary& source_vocab,
                            std::size_t n_per_case, std::uint64_t seed);

// One row per target token: id, token, case, "source:weight" list.
void write_mapping_tsv(const TokenMapping& mapping,
                       const Vocabulary& target_vocab,
                       const Vocabulary& source_vocab, std::ostream& out);

// Subword-routed tokens with their query and retrieved neighbors.
void write_neighbor_dump(const TokenMapping& mapping,
                         const Vocabulary& target_vocab,
                         const Vocabulary& source_vocab, std::ostream& out);

}  // namespace tokbridge

#endif  // TOKBRIDGE_REPORT_H_
