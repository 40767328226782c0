// tokbridge command line: one subcommand per pipeline stage plus `pipeline`
// for an end-to-end run. Exit codes: 0 success, 1 invalid input, 2 I/O
// failure, 3 internal error. Failures print one JSON object on stderr.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tokbridge/error.h"
#include "tokbridge/pipeline.h"

namespace fs = std::filesystem;
using tokbridge::PipelineConfig;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string dictionary;
  std::string source_vocab;
  std::string source_convention;
  std::string source_embeddings;
  std::string target_vocab;
  std::string target_convention;
  std::string sidecar;
  std::string output_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Random seed (required here or in the config)");
  cmd->add_option("--threads", f.threads, "Worker threads");
}

void add_inputs(CLI::App* cmd, CommonFlags& f, bool dictionary, bool source,
                bool embeddings, bool target) {
  if (dictionary) cmd->add_option("--dictionary", f.dictionary, "Bilingual dictionary TSV");
  if (source) {
    cmd->add_option("--source-vocab", f.source_vocab, "Source vocabulary");
    cmd->add_option("--source-convention", f.source_convention,
                    "wordpiece | bpe_byte | sentencepiece | plain");
  }
  if (embeddings) {
    cmd->add_option("--source-embeddings", f.source_embeddings,
                    "Source embedding table (exchange format)");
  }
  if (target) {
    cmd->add_option("--target-vocab", f.target_vocab, "Target vocabulary");
    cmd->add_option("--target-convention", f.target_convention,
                    "wordpiece | bpe_byte | sentencepiece | plain");
  }
}

// Config file first, then command-line flags on top.
PipelineConfig resolve(const CommonFlags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : PipelineConfig::load(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (!f.dictionary.empty()) c.dictionary = f.dictionary;
  if (!f.source_vocab.empty()) c.source_vocab = f.source_vocab;
  if (!f.source_embeddings.empty()) c.source_embeddings = f.source_embeddings;
  if (!f.target_vocab.empty()) c.target_vocab = f.target_vocab;
  if (!f.sidecar.empty()) c.sidecar = f.sidecar;
  if (!f.output_dir.empty()) c.output_dir = f.output_dir;
  const auto convention = [](const std::string& name, const char* field) {
    auto parsed = tokbridge::parse_convention(name);
    if (!parsed) {
      throw tokbridge::ValidationError(field, "unknown convention \"" + name + "\"");
    }
    return parsed;
  };
  if (!f.source_convention.empty()) {
    c.source_convention = convention(f.source_convention, "source.convention");
  }
  if (!f.target_convention.empty()) {
    c.target_convention = convention(f.target_convention, "target.convention");
  }
  if (c.threads == 0) throw tokbridge::ValidationError("threads", "must be at least 1");
  c.propagate_seed();
  return c;
}

// Output paths default to the config's output_dir when not given.
fs::path output_path(const std::string& flag, const PipelineConfig& c,
                     const char* default_name, const char* field) {
  if (!flag.empty()) return flag;
  if (c.output_dir.empty()) {
    throw tokbridge::ValidationError(field, "is required (or set output_dir)");
  }
  return c.output_dir / default_name;
}

int fail(const char* kind, const std::string& message,
         const std::string& field = {}, std::size_t line = 0) {
  nlohmann::ordered_json err;
  err["error"] = kind;
  if (!field.empty()) err["field"] = field;
  if (line > 0) err["line"] = line;
  err["message"] = message;
  std::cerr << err.dump() << '\n';
  return std::string_view(kind) == "io" ? 2 : std::string_view(kind) == "internal" ? 3 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-embedding transfer across tokenizers"};
  app.require_subcommand(1);

  CommonFlags f;
  std::string output, corpus, model, mapping, rows, stats_json, tsv, neighbors;
  bool augment = false, weighted = false;
  std::optional<std::uint32_t> dim, epochs, min_n, max_n, negatives;
  std::optional<double> lr;
  std::optional<std::uint64_t> buckets;
  std::optional<std::size_t> k, k_max, examples;

  auto* sym = app.add_subcommand("symmetrize", "Build the bigram corpus from a dictionary");
  add_common(sym, f);
  add_inputs(sym, f, true, false, false, false);
  sym->add_option("-o,--output", output, "Corpus output path");
  sym->add_flag("--augment-compounds", augment, "Add tag-dropped word forms");
  sym->add_flag("--frequency-weighted", weighted, "Repeat entries by frequency");

  auto* train = app.add_subcommand("train-subword", "Train the subword embedding model");
  add_common(train, f);
  train->add_option("--corpus", corpus, "Bigram corpus");
  train->add_option("-o,--output", output, "Model output path");
  train->add_option("--dim", dim, "Embedding dimension");
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--min-n", min_n, "Shortest character n-gram");
  train->add_option("--max-n", max_n, "Longest character n-gram");
  train->add_option("--negatives", negatives, "Negative samples per update");
  train->add_option("--lr", lr, "Initial learning rate");
  train->add_option("--buckets", buckets, "Hash bucket count");

  auto* map = app.add_subcommand("map", "Map target tokens onto source tokens");
  add_common(map, f);
  add_inputs(map, f, true, true, false, true);
  map->add_option("--model", model, "Trained subword model");
  map->add_option("--sidecar", f.sidecar, "Tokenization overrides TSV");
  map->add_option("--k", k, "Subword neighbors per token");
  map->add_option("--k-max", k_max, "Dictionary translations per token");
  map->add_option("-o,--output", output, "Mapping output path (JSONL)");

  auto* conv = app.add_subcommand("convert", "Build target embeddings from a mapping");
  add_common(conv, f);
  add_inputs(conv, f, false, true, true, true);
  conv->add_option("--mapping", mapping, "Mapping file (JSONL)");
  conv->add_option("-o,--output", output, "Target embedding output path");
  conv->add_option("--rows", rows, "Per-row conversion report (TSV)");

  auto* rep = app.add_subcommand("report", "Summarize a mapping");
  add_common(rep, f);
  add_inputs(rep, f, false, true, false, true);
  rep->add_option("--mapping", mapping, "Mapping file (JSONL)");
  rep->add_option("-o,--output", output, "Markdown report path");
  rep->add_option("--stats-json", stats_json, "Machine-readable statistics");
  rep->add_option("--tsv", tsv, "Full mapping table");
  rep->add_option("--neighbors", neighbors, "Subword neighbor dump");
  rep->add_option("--examples-per-case", examples, "Examples shown per route");

  auto* pipe = app.add_subcommand("pipeline", "Run every stage and write a manifest");
  add_common(pipe, f);
  add_inputs(pipe, f, true, true, true, true);
  pipe->add_option("--sidecar", f.sidecar, "Tokenization overrides TSV");
  pipe->add_option("--output-dir", f.output_dir, "Directory for all artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    PipelineConfig c = resolve(f);
    if (augment) c.corpus.augment_compounds = true;
    if (weighted) c.corpus.frequency_weighted = true;
    if (dim) c.subword.dim = *dim;
    if (epochs) c.subword.epochs = *epochs;
    if (min_n) c.subword.min_n = *min_n;
    if (max_n) c.subword.max_n = *max_n;
    if (negatives) c.subword.negatives = *negatives;
    if (lr) c.subword.learning_rate = *lr;
    if (buckets) c.subword.bucket_count = *buckets;
    if (k) c.mapper.k = *k;
    if (k_max) c.mapper.k_max = *k_max;
    if (examples) c.examples_per_case = *examples;
    c.subword.validate();

    const auto default_input = [&](const std::string& flag, const char* name) {
      return flag.empty() ? c.output_dir / name : fs::path(flag);
    };

    if (*sym) {
      tokbridge::run_symmetrize(c, output_path(output, c, "corpus.txt", "output"));
    } else if (*train) {
      tokbridge::run_train_subword(
          c, default_input(corpus, "corpus.txt"),
          output_path(output, c, "subword_model.bin", "output"));
    } else if (*map) {
      tokbridge::run_map(c, default_input(model, "subword_model.bin"),
                         output_path(output, c, "mapping.jsonl", "output"));
    } else if (*conv) {
      tokbridge::run_convert(
          c, default_input(mapping, "mapping.jsonl"),
          output_path(output, c, "target_embeddings.emb", "output"), rows);
    } else if (*rep) {
      tokbridge::run_report(c, default_input(mapping, "mapping.jsonl"),
                            {output_path(output, c, "report.md", "output"),
                             stats_json, tsv, neighbors});
    } else if (*pipe) {
      const auto manifest = tokbridge::run_pipeline(c);
      std::cout << manifest["stats"].dump(2) << '\n';
    }
  } catch (const tokbridge::ValidationError& e) {
    return fail("validation", e.what(), e.field());
  } catch (const tokbridge::ParseError& e) {
    return fail("parse", e.what(), {}, e.line());
  } catch (const tokbridge::IoError& e) {
    return fail("io", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
