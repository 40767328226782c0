#ifndef TOKBRIDGE_PIPELINE_H_
#define TOKBRIDGE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tokbridge/dictionary.h"
#include "tokbridge/subword.h"
#include "tokbridge/token_mapper.h"
#include "tokbridge/vocab.h"

namespace tokbridge {

namespace fs = std::filesystem;

// Everything a run needs. Relative paths in a config file resolve against
// the file's directory. Every field can be overridden from the command line.
struct PipelineConfig {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  fs::path dictionary;
  fs::path source_vocab;
  std::optional<Convention> source_convention;
  fs::path source_embeddings;
  fs::path target_vocab;
  std::optional<Convention> target_convention;
  fs::path output_dir;
  fs::path sidecar;  // optional tokenization overrides

  CorpusOptions corpus;
  SubwordConfig subword;
  MapperConfig mapper;
  std::size_t examples_per_case = 5;

  static PipelineConfig from_json(const nlohmann::json& doc,
                                  const fs::path& base_dir);
  static PipelineConfig load(const fs::path& path);
  // Effective settings, paths as stored.
  nlohmann::ordered_json to_json() const;

  // Throws ValidationError naming the first missing field. Accepted names:
  // seed, dictionary, source.vocab, source.convention, source.embeddings,
  // target.vocab, target.convention, output_dir.
  void require(std::initializer_list<std::string_view> fields) const;
  // seed pushed into every seeded component.
  void propagate_seed();
};

std::string sha256_file(const fs::path& path);

void run_symmetrize(const PipelineConfig& config, const fs::path& output);
void run_train_subword(const PipelineConfig& config, const fs::path& corpus,
                       const fs::path& output);
void run_map(const PipelineConfig& config, const fs::path& model,
             const fs::path& output);
// `rows_output` may be empty to skip the per-row report.
void run_convert(const PipelineConfig& config, const fs::path& mapping,
                 const fs::path& output, const fs::path& rows_output);

struct ReportOutputs {
  fs::path markdown;
  fs::path stats_json;  // optional
  fs::path tsv;         // optional
  fs::path neighbors;   // optional
};
nlohmann::ordered_json run_report(const PipelineConfig& config,
                                  const fs::path& mapping,
                                  const ReportOutputs& outputs);

// Runs all five stages into config.output_dir and writes manifest.json.
// Returns the manifest.
nlohmann::ordered_json run_pipeline(const PipelineConfig& config);

}  // namespace tokbridge

#endif  // TOKBRIDGE_PIPELINE_H_
