#include "tokbridge/pipeline.h"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <type_traits>

#include "tokbridge/converter.h"
#include "tokbridge/embedding_io.h"
#include "tokbridge/error.h"
#include "tokbridge/report.h"

namespace tokbridge {
namespace {

using nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

constexpr std::string_view kCorpusFile = "corpus.txt";
constexpr std::string_view kModelFile = "subword_model.bin";
constexpr std::string_view kMappingFile = "mapping.jsonl";
constexpr std::string_view kEmbeddingsFile = "target_embeddings.emb";
constexpr std::string_view kReportFile = "report.md";
constexpr std::string_view kManifestFile = "manifest.json";

template <typename T>
T get_field(const json& obj, const char* key, const std::string& field, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  const json& value = obj[key];
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (!value.is_number_integer()) throw ValidationError(field, "must be an integer");
    if (value.is_number_unsigned()) {
      if (value.get<std::uint64_t>() > std::numeric_limits<T>::max()) {
        throw ValidationError(field, "is out of range");
      }
    } else {
      const auto v = value.get<std::int64_t>();
      if (v < 0 && std::is_unsigned_v<T>) throw ValidationError(field, "must not be negative");
      if (v < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
          (v > 0 && static_cast<std::uint64_t>(v) > std::numeric_limits<T>::max())) {
        throw ValidationError(field, "is out of range");
      }
    }
  }
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(field, "has the wrong type");
  }
}

fs::path get_path(const json& obj, const char* key, const std::string& field,
                  const fs::path& base_dir) {
  const auto raw = get_field<std::string>(obj, key, field, "");
  if (raw.empty()) return {};
  fs::path p(raw);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::optional<Convention> get_convention(const json& obj,
                                         const std::string& field) {
  if (!obj.contains("convention")) return std::nullopt;
  const auto name = get_field<std::string>(obj, "convention", field, "");
  const auto c = parse_convention(name);
  if (!c) throw ValidationError(field, "unknown convention \"" + name + "\"");
  return c;
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  if (!doc[key].is_object()) throw ValidationError(key, "must be an object");
  return doc[key];
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
}

Vocabulary load_source_vocab(const PipelineConfig& c) {
  return load_vocab(c.source_vocab, *c.source_convention);
}

Vocabulary load_target_vocab(const PipelineConfig& c) {
  return load_vocab(c.target_vocab, *c.target_convention);
}

// Resolves a loaded mapping file against the vocabularies it claims to
// describe, so stale files are caught before use.
TokenMapping checked_mapping(const fs::path& path, const Vocabulary& target,
                             const Vocabulary& source) {
  LoadedMapping loaded = load_mapping(path);
  if (loaded.target_tokens != target.tokens()) {
    throw ValidationError("mapping", "mapping tokens do not match the target vocabulary");
  }
  for (const auto& [id, token] : loaded.source_tokens) {
    if (id >= source.size() || source.token(id) != token) {
      throw ValidationError("mapping", "source token \"" + token +
                                           "\" does not match the source vocabulary");
    }
  }
  loaded.mapping.validate(source.size());
  return std::move(loaded.mapping);
}

OrderedJson file_entry(const fs::path& path, const fs::path& shown) {
  return {{"path", shown.generic_string()}, {"sha256", sha256_file(path)}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& doc,
                                         const fs::path& base_dir) {
  if (!doc.is_object()) throw ValidationError("config", "must be a JSON object");
  PipelineConfig c;
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    if (!doc["seed"].is_number_integer()) {
      throw ValidationError("seed", "must be an integer");
    }
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  c.threads = get_field<unsigned>(doc, "threads", "threads", 1);
  c.dictionary = get_path(doc, "dictionary", "dictionary", base_dir);
  c.output_dir = get_path(doc, "output_dir", "output_dir", base_dir);

  const json& source = section(doc, "source");
  c.source_vocab = get_path(source, "vocab", "source.vocab", base_dir);
  c.source_embeddings =
      get_path(source, "embeddings", "source.embeddings", base_dir);
  c.source_convention = get_convention(source, "source.convention");

  const json& target = section(doc, "target");
  c.target_vocab = get_path(target, "vocab", "target.vocab", base_dir);
  c.target_convention = get_convention(target, "target.convention");

  const json& corpus = section(doc, "corpus");
  c.corpus.augment_compounds = get_field<bool>(
      corpus, "augment_compounds", "corpus.augment_compounds", false);
  c.corpus.frequency_weighted = get_field<bool>(
      corpus, "frequency_weighted", "corpus.frequency_weighted", false);

  const json& sw = section(doc, "subword");
  c.subword.dim = get_field<std::uint32_t>(sw, "dim", "subword.dim", c.subword.dim);
  c.subword.min_n = get_field<std::uint32_t>(sw, "min_n", "subword.min_n", c.subword.min_n);
  c.subword.max_n = get_field<std::uint32_t>(sw, "max_n", "subword.max_n", c.subword.max_n);
  c.subword.epochs = get_field<std::uint32_t>(sw, "epochs", "subword.epochs", c.subword.epochs);
  c.subword.negatives = get_field<std::uint32_t>(sw, "negatives", "subword.negatives",
                                                 c.subword.negatives);
  c.subword.learning_rate = get_field<double>(sw, "learning_rate", "subword.learning_rate",
                                              c.subword.learning_rate);
  c.subword.bucket_count = get_field<std::uint64_t>(sw, "bucket_count", "subword.bucket_count",
                                                    c.subword.bucket_count);

  const json& mapper = section(doc, "mapper");
  c.mapper.k_max = get_field<std::size_t>(mapper, "k_max", "mapper.k_max", c.mapper.k_max);
  c.mapper.k = get_field<std::size_t>(mapper, "k", "mapper.k", c.mapper.k);
  c.mapper.case_insensitive_retry =
      get_field<bool>(mapper, "case_insensitive_retry",
                      "mapper.case_insensitive_retry", true);
  c.sidecar = get_path(mapper, "sidecar", "mapper.sidecar", base_dir);

  const json& tags = section(doc, "tags");
  c.mapper.tags.source_start = get_field<std::string>(
      tags, "source_start", "tags.source_start", c.mapper.tags.source_start);
  c.mapper.tags.source_end = get_field<std::string>(
      tags, "source_end", "tags.source_end", c.mapper.tags.source_end);
  c.mapper.tags.target_start = get_field<std::string>(
      tags, "target_start", "tags.target_start", c.mapper.tags.target_start);
  c.mapper.tags.target_end = get_field<std::string>(
      tags, "target_end", "tags.target_end", c.mapper.tags.target_end);

  const json& report = section(doc, "report");
  c.examples_per_case = get_field<std::size_t>(
      report, "examples_per_case", "report.examples_per_case", 5);

  c.subword.validate();
  c.mapper.tags.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return from_json(doc, path.parent_path());
}

OrderedJson PipelineConfig::to_json() const {
  const auto path_or_null = [](const fs::path& p) -> OrderedJson {
    if (p.empty()) return nullptr;
    return p.generic_string();
  };
  const auto convention_or_null =
      [](const std::optional<Convention>& c) -> OrderedJson {
    if (!c) return nullptr;
    return std::string(to_string(*c));
  };
  OrderedJson out;
  out["seed"] = seed ? OrderedJson(*seed) : OrderedJson(nullptr);
  out["threads"] = threads;
  out["dictionary"] = path_or_null(dictionary);
  out["source"] = {{"vocab", path_or_null(source_vocab)},
                   {"convention", convention_or_null(source_convention)},
                   {"embeddings", path_or_null(source_embeddings)}};
  out["target"] = {{"vocab", path_or_null(target_vocab)},
                   {"convention", convention_or_null(target_convention)}};
  out["output_dir"] = path_or_null(output_dir);
  out["corpus"] = {{"augment_compounds", corpus.augment_compounds},
                   {"frequency_weighted", corpus.frequency_weighted}};
  out["subword"] = {{"dim", subword.dim},
                    {"min_n", subword.min_n},
                    {"max_n", subword.max_n},
                    {"epochs", subword.epochs},
                    {"negatives", subword.negatives},
                    {"learning_rate", subword.learning_rate},
                    {"bucket_count", subword.bucket_count}};
  out["mapper"] = {{"k_max", mapper.k_max},
                   {"k", mapper.k},
                   {"case_insensitive_retry", mapper.case_insensitive_retry},
                   {"sidecar", path_or_null(sidecar)}};
  out["tags"] = {{"source_start", mapper.tags.source_start},
                 {"source_end", mapper.tags.source_end},
                 {"target_start", mapper.tags.target_start},
                 {"target_end", mapper.tags.target_end}};
  out["report"] = {{"examples_per_case", examples_per_case}};
  return out;
}

void PipelineConfig::require(
    std::initializer_list<std::string_view> fields) const {
  const auto need_file = [](const fs::path& p, std::string_view field) {
    if (p.empty()) throw ValidationError(std::string(field), "is required");
    if (!fs::is_regular_file(p)) {
      throw ValidationError(std::string(field),
                            "file not found: " + p.string());
    }
  };
  for (std::string_view field : fields) {
    if (field == "seed") {
      if (!seed) throw ValidationError("seed", "is required");
    } else if (field == "dictionary") {
      need_file(dictionary, field);
    } else if (field == "source.vocab") {
      need_file(source_vocab, field);
    } else if (field == "source.embeddings") {
      need_file(source_embeddings, field);
    } else if (field == "target.vocab") {
      need_file(target_vocab, field);
    } else if (field == "source.convention") {
      if (!source_convention) throw ValidationError("source.convention", "is required");
    } else if (field == "target.convention") {
      if (!target_convention) throw ValidationError("target.convention", "is required");
    } else if (field == "output_dir") {
      if (output_dir.empty()) throw ValidationError("output_dir", "is required");
    } else {
      throw ValidationError(std::string(field), "unknown config field");
    }
  }
  if (!sidecar.empty() && !fs::is_regular_file(sidecar)) {
    throw ValidationError("mapper.sidecar", "file not found: " + sidecar.string());
  }
}

void PipelineConfig::propagate_seed() {
  if (!seed) return;
  corpus.seed = *seed;
  subword.seed = *seed;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 initialization failed");
  }
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(got));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void run_symmetrize(const PipelineConfig& config, const fs::path& output) {
  config.require({"seed", "dictionary"});
  const Dictionary dict = load_dictionary(config.dictionary, config.mapper.tags);
  CorpusOptions options = config.corpus;
  options.seed = *config.seed;
  const BigramCorpus corpus =
      generate_bigram_corpus(dict, options, config.mapper.tags);
  ensure_parent(output);
  corpus.save(output);
}

void run_train_subword(const PipelineConfig& config, const fs::path& corpus,
                       const fs::path& output) {
  config.require({"seed"});
  if (!fs::is_regular_file(corpus)) {
    throw ValidationError("corpus", "file not found: " + corpus.string());
  }
  SubwordConfig sw = config.subword;
  sw.seed = *config.seed;
  const SubwordModel model =
      train_subword(BigramCorpus::load(corpus), sw, config.threads);
  ensure_parent(output);
  model.save(output);
}

void run_map(const PipelineConfig& config, const fs::path& model_path,
             const fs::path& output) {
  config.require({"dictionary", "source.vocab", "source.convention",
                  "target.vocab", "target.convention"});
  if (!fs::is_regular_file(model_path)) {
    throw ValidationError("model", "file not found: " + model_path.string());
  }
  const Vocabulary source = load_source_vocab(config);
  const Vocabulary target = load_target_vocab(config);
  const Dictionary dict = load_dictionary(config.dictionary, config.mapper.tags);
  const SubwordModel model = SubwordModel::load(model_path);
  std::optional<TokenizationOverrides> overrides;
  if (!config.sidecar.empty()) overrides = load_overrides(config.sidecar, source);

  MapperConfig mapper = config.mapper;
  mapper.threads = config.threads;
  const TokenMapping mapping = build_mapping(
      target, source, dict, model, mapper, overrides ? &*overrides : nullptr);
  mapping.validate(source.size());
  ensure_parent(output);
  save_mapping(mapping, target, source, output);
}

void run_convert(const PipelineConfig& config, const fs::path& mapping_path,
                 const fs::path& output, const fs::path& rows_output) {
  config.require({"source.vocab", "source.convention", "source.embeddings",
                  "target.vocab", "target.convention"});
  if (!fs::is_regular_file(mapping_path)) {
    throw ValidationError("mapping", "file not found: " + mapping_path.string());
  }
  const Vocabulary source = load_source_vocab(config);
  const Vocabulary target = load_target_vocab(config);
  const EmbeddingTable source_table = read_embeddings(config.source_embeddings);
  source_table.check_matches(source);
  const TokenMapping mapping = checked_mapping(mapping_path, target, source);

  const ConversionResult result =
      convert(source_table, mapping, target, config.threads);
  ensure_parent(output);
  write_embeddings(result.table, output);
  if (!rows_output.empty()) {
    ensure_parent(rows_output);
    std::ofstream out(rows_output, std::ios::binary);
    if (!out) throw IoError("cannot create " + rows_output.string());
    write_conversion_rows(result.rows, result.table, out);
  }
}

nlohmann::ordered_json run_report(const PipelineConfig& config,
                                  const fs::path& mapping_path,
                                  const ReportOutputs& outputs) {
  config.require({"seed", "source.vocab", "source.convention", "target.vocab",
                  "target.convention"});
  if (!fs::is_regular_file(mapping_path)) {
    throw ValidationError("mapping", "file not found: " + mapping_path.string());
  }
  const Vocabulary source = load_source_vocab(config);
  const Vocabulary target = load_target_vocab(config);
  const TokenMapping mapping = checked_mapping(mapping_path, target, source);
  const MappingStats stats = summarize(mapping, target, source);

  const auto open = [](const fs::path& p) {
    ensure_parent(p);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot create " + p.string());
    return out;
  };
  {
    auto out = open(outputs.markdown);
    out << "# Token mapping report\n\n"
        << render_stats(stats) << "\n## Examples\n\n"
        << render_examples(mapping, target, source, config.examples_per_case,
                           *config.seed);
  }
  const auto json_stats = stats_to_json(stats);
  if (!outputs.stats_json.empty()) {
    auto out = open(outputs.stats_json);
    out << json_stats.dump(2) << '\n';
  }
  if (!outputs.tsv.empty()) {
    auto out = open(outputs.tsv);
    write_mapping_tsv(mapping, target, source, out);
  }
  if (!outputs.neighbors.empty()) {
    auto out = open(outputs.neighbors);
    write_neighbor_dump(mapping, target, source, out);
  }
  return json_stats;
}

nlohmann::ordered_json run_pipeline(const PipelineConfig& config) {
  config.require({"seed", "dictionary", "source.vocab", "source.convention",
                  "source.embeddings", "target.vocab", "target.convention",
                  "output_dir"});
  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  const fs::path corpus = dir / kCorpusFile;
  const fs::path model = dir / kModelFile;
  const fs::path mapping = dir / kMappingFile;
  const fs::path embeddings = dir / kEmbeddingsFile;
  const fs::path report = dir / kReportFile;

  run_symmetrize(config, corpus);
  run_train_subword(config, corpus, model);
  run_map(config, model, mapping);
  run_convert(config, mapping, embeddings, {});
  const auto stats = run_report(config, mapping, {report, {}, {}, {}});

  OrderedJson manifest;
  manifest["tool"] = "tokbridge";
  manifest["manifest_version"] = 1;
  OrderedJson cfg = config.to_json();
  cfg.erase("output_dir");
  manifest["config"] = std::move(cfg);
  OrderedJson inputs;
  inputs["dictionary"] = file_entry(config.dictionary, config.dictionary.filename());
  inputs["source_vocab"] = file_entry(config.source_vocab, config.source_vocab.filename());
  inputs["source_embeddings"] =
      file_entry(config.source_embeddings, config.source_embeddings.filename());
  inputs["target_vocab"] = file_entry(config.target_vocab, config.target_vocab.filename());
  if (!config.sidecar.empty()) {
    inputs["sidecar"] = file_entry(config.sidecar, config.sidecar.filename());
  }
  manifest["inputs"] = std::move(inputs);
  OrderedJson artifacts;
  artifacts["corpus"] = file_entry(corpus, kCorpusFile);
  artifacts["subword_model"] = file_entry(model, kModelFile);
  artifacts["mapping"] = file_entry(mapping, kMappingFile);
  artifacts["target_embeddings"] = file_entry(embeddings, kEmbeddingsFile);
  artifacts["report"] = file_entry(report, kReportFile);
  manifest["artifacts"] = std::move(artifacts);
  manifest["stats"] = stats;

  std::ofstream out(dir / kManifestFile, std::ios::binary);
  if (!out) throw IoError("cannot create manifest");
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace tokbridge
