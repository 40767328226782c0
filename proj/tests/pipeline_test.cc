#include "tokbridge/pipeline.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "synthetic.h"
#include "tokbridge/converter.h"
#include "tokbridge/embedding_io.h"
#include "tokbridge/error.h"

using namespace tokbridge;
using testing_support::TempDir;

namespace {

const fs::path kToy = fs::path(TOKBRIDGE_FIXTURE_DIR) / "toy";
const char* const kArtifacts[] = {"corpus.txt", "subword_model.bin", "mapping.jsonl",
                                  "target_embeddings.emb", "report.md"};

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args, const TempDir& scratch) {
  std::string command = quote(TOKBRIDGE_CLI);
  for (const auto& a : args) command += " " + quote(a);
  const fs::path out = scratch / "cli.stdout";
  const fs::path err = scratch / "cli.stderr";
  command += " > " + quote(out.string()) + " 2> " + quote(err.string());
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

nlohmann::json toy_config_json() {
  std::ifstream in(kToy / "config.json");
  return nlohmann::json::parse(in);
}

// Toy config with every input path made absolute, written into `dir`.
fs::path write_config(const TempDir& dir, nlohmann::json doc) {
  doc["dictionary"] = (kToy / doc["dictionary"].get<std::string>()).string();
  for (const char* side : {"source", "target"}) {
    doc[side]["vocab"] = (kToy / doc[side]["vocab"].get<std::string>()).string();
  }
  doc["source"]["embeddings"] =
      (kToy / doc["source"]["embeddings"].get<std::string>()).string();
  doc["output_dir"] = (dir / "out").string();
  const fs::path path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

}  // namespace

TEST(Sha256, KnownVectors) {
  TempDir dir;
  std::ofstream(dir / "abc") << "abc";
  std::ofstream(dir / "empty");
  EXPECT_EQ(sha256_file(dir / "abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_file(dir / "empty"),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_THROW(sha256_file(dir / "missing"), IoError);
}

TEST(PipelineConfig, ParsesToyConfig) {
  const auto c = PipelineConfig::load(kToy / "config.json");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.dictionary, kToy / "dictionary.tsv");
  EXPECT_EQ(c.output_dir, kToy / "out");
  EXPECT_EQ(c.source_convention, Convention::kBpeByte);
  EXPECT_EQ(c.target_convention, Convention::kSentencePiece);
  EXPECT_TRUE(c.corpus.augment_compounds);
  EXPECT_EQ(c.subword.bucket_count, 50000u);
  EXPECT_EQ(c.subword.dim, 64u);
  EXPECT_EQ(c.mapper.k, 3u);
  EXPECT_EQ(c.mapper.k_max, 5u);
  EXPECT_EQ(c.examples_per_case, 5u);
}

TEST(PipelineConfig, SeedPropagates) {
  auto c = PipelineConfig::from_json(nlohmann::json{{"seed", 99}}, ".");
  c.propagate_seed();
  EXPECT_EQ(c.subword.seed, 99u);
  EXPECT_EQ(c.corpus.seed, 99u);
}

TEST(PipelineConfig, DefaultsWhenSectionsAbsent) {
  const auto c = PipelineConfig::from_json(nlohmann::json::object(), "/base");
  EXPECT_FALSE(c.seed);
  EXPECT_EQ(c.subword, SubwordConfig{});
  EXPECT_EQ(c.mapper.k_max, 5u);
  EXPECT_TRUE(c.mapper.case_insensitive_retry);
}

TEST(PipelineConfig, BadValuesNameTheField) {
  const auto field_of = [](const nlohmann::json& doc) -> std::string {
    try {
      PipelineConfig::from_json(doc, ".");
    } catch (const ValidationError& e) {
      return e.field();
    }
    return "";
  };
  EXPECT_EQ(field_of({{"source", {{"convention", "morse"}}}}), "source.convention");
  EXPECT_EQ(field_of({{"seed", "seven"}}), "seed");
  EXPECT_EQ(field_of({{"subword", {{"dim", -3}}}}), "subword.dim");
  EXPECT_EQ(field_of({{"subword", {{"epochs", 2.5}}}}), "subword.epochs");
  EXPECT_EQ(field_of({{"mapper", {{"k", 1e30}}}}), "mapper.k");
  EXPECT_EQ(field_of({{"threads", 5000000000}}), "threads");
}

TEST(PipelineConfig, RequireReportsMissingFields) {
  TempDir dir;
  const auto c = PipelineConfig::load(write_config(dir, toy_config_json()));
  EXPECT_NO_THROW(c.require({"seed", "dictionary", "source.vocab", "source.convention",
                             "source.embeddings", "target.vocab", "target.convention",
                             "output_dir"}));
  auto no_seed = c;
  no_seed.seed.reset();
  try {
    no_seed.require({"seed"});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "seed");
  }
  auto missing = c;
  missing.dictionary = dir / "nope.tsv";
  try {
    missing.require({"dictionary"});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "dictionary");
  }
}

TEST(PipelineConfig, LoadErrors) {
  TempDir dir;
  EXPECT_THROW(PipelineConfig::load(dir / "none.json"), IoError);
  std::ofstream(dir / "bad.json") << "{ \"seed\": ";
  EXPECT_THROW(PipelineConfig::load(dir / "bad.json"), ParseError);
}

TEST(PipelineConfig, JsonRoundTrip) {
  const auto c = PipelineConfig::load(kToy / "config.json");
  const auto again = PipelineConfig::from_json(nlohmann::json::parse(c.to_json().dump()), "/");
  EXPECT_EQ(again.seed, c.seed);
  EXPECT_EQ(again.dictionary, c.dictionary);
  EXPECT_EQ(again.subword, c.subword);
  EXPECT_EQ(again.mapper.k, c.mapper.k);
  EXPECT_EQ(again.corpus.augment_compounds, c.corpus.augment_compounds);
}

TEST(Cli, PipelineOnToyFixture) {
  TempDir dir;
  const auto run = run_cli({"pipeline", "--config", (kToy / "config.json").string(),
                            "--output-dir", (dir / "out").string()},
                           dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  for (const char* name : kArtifacts) {
    EXPECT_TRUE(fs::exists(dir / "out" / name)) << name;
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  ASSERT_EQ(manifest["artifacts"].size(), 5u);
  for (const auto& [key, artifact] : manifest["artifacts"].items()) {
    EXPECT_EQ(artifact["sha256"],
              sha256_file(dir / "out" / artifact["path"].get<std::string>()))
        << key;
  }
  EXPECT_EQ(manifest["inputs"]["dictionary"]["sha256"],
            sha256_file(kToy / "dictionary.tsv"));
  EXPECT_EQ(manifest["config"]["seed"], 7);
  EXPECT_FALSE(manifest["config"].contains("output_dir"));

  const auto stats = nlohmann::json::parse(run.out);
  EXPECT_EQ(stats["total"], 200);
  std::size_t sum = 0;
  for (const auto& [route, count] : stats["routes"].items()) sum += count.get<std::size_t>();
  EXPECT_EQ(sum, 200u);
  EXPECT_EQ(stats, manifest["stats"]);

  const auto target_vocab =
      load_vocab(kToy / "target_vocab.txt", Convention::kSentencePiece);
  const auto table = read_embeddings(dir / "out" / "target_embeddings.emb");
  EXPECT_NO_THROW(table.check_matches(target_vocab));
  EXPECT_EQ(table.dim(), 16u);
  EXPECT_TRUE(verify(table).ok());
  const auto mapping = load_mapping(dir / "out" / "mapping.jsonl");
  EXPECT_EQ(mapping.mapping.size(), 200u);
}

TEST(Cli, RerunGivesIdenticalManifest) {
  TempDir dir;
  const auto config = (kToy / "config.json").string();
  ASSERT_EQ(run_cli({"pipeline", "--config", config, "--output-dir", (dir / "a").string()}, dir)
                .exit_code,
            0);
  ASSERT_EQ(run_cli({"pipeline", "--config", config, "--output-dir", (dir / "b").string()}, dir)
                .exit_code,
            0);
  EXPECT_EQ(slurp(dir / "a" / "manifest.json"), slurp(dir / "b" / "manifest.json"));
}

TEST(Cli, SeedChangesTrainedArtifacts) {
  TempDir dir;
  const auto config = (kToy / "config.json").string();
  ASSERT_EQ(run_cli({"pipeline", "--config", config, "--output-dir", (dir / "a").string()}, dir)
                .exit_code,
            0);
  ASSERT_EQ(run_cli({"pipeline", "--config", config, "--seed", "8", "--output-dir",
                     (dir / "b").string()},
                    dir)
                .exit_code,
            0);
  EXPECT_NE(sha256_file(dir / "a" / "subword_model.bin"),
            sha256_file(dir / "b" / "subword_model.bin"));
}

TEST(Cli, StagesMatchPipeline) {
  TempDir dir;
  const auto config = write_config(dir, toy_config_json()).string();
  ASSERT_EQ(run_cli({"pipeline", "--config", config, "--output-dir", (dir / "ref").string()},
                    dir)
                .exit_code,
            0);
  for (const char* stage : {"symmetrize", "train-subword", "map", "convert", "report"}) {
    const auto run = run_cli({stage, "--config", config}, dir);
    ASSERT_EQ(run.exit_code, 0) << stage << ": " << run.err;
  }
  for (const char* name : kArtifacts) {
    EXPECT_EQ(sha256_file(dir / "out" / name), sha256_file(dir / "ref" / name)) << name;
  }
}

TEST(Cli, ReportSideOutputs) {
  TempDir dir;
  const auto config = write_config(dir, toy_config_json()).string();
  ASSERT_EQ(run_cli({"pipeline", "--config", config}, dir).exit_code, 0);
  const auto run = run_cli({"report", "--config", config, "-o", (dir / "r.md").string(),
                            "--stats-json", (dir / "s.json").string(), "--tsv",
                            (dir / "m.tsv").string(), "--neighbors",
                            (dir / "n.tsv").string(), "--examples-per-case", "0"},
                           dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  const auto report = slurp(dir / "r.md");
  EXPECT_TRUE(report.starts_with("# Token mapping report\n")) << report;
  EXPECT_EQ(report.find("E_t["), std::string::npos);
  const auto stats = nlohmann::json::parse(slurp(dir / "s.json"));
  EXPECT_EQ(stats["total"], 200);
  const auto tsv = slurp(dir / "m.tsv");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 201);
  const auto neighbors = slurp(dir / "n.tsv");
  EXPECT_EQ(std::count(neighbors.begin(), neighbors.end(), '\n'),
            1 + 3 * stats["routes"]["subword_fasttext"].get<long>());
}

TEST(Cli, MissingDictionaryExitsOneNamingField) {
  TempDir dir;
  auto doc = toy_config_json();
  const auto config = write_config(dir, doc);
  auto patched = nlohmann::json::parse(slurp(config));
  patched["dictionary"] = (dir / "absent.tsv").string();
  std::ofstream(config) << patched.dump();
  const auto run = run_cli({"pipeline", "--config", config.string()}, dir);
  EXPECT_EQ(run.exit_code, 1);
  const auto err = nlohmann::json::parse(run.err);
  EXPECT_EQ(err["error"], "validation");
  EXPECT_EQ(err["field"], "dictionary");
  EXPECT_NE(err["message"].get<std::string>().find("absent.tsv"), std::string::npos);
}

TEST(Cli, SeedIsRequired) {
  TempDir dir;
  auto doc = toy_config_json();
  doc.erase("seed");
  const auto config = write_config(dir, doc).string();
  const auto run = run_cli({"pipeline", "--config", config}, dir);
  EXPECT_EQ(run.exit_code, 1);
  EXPECT_EQ(nlohmann::json::parse(run.err)["field"], "seed");
  EXPECT_EQ(run_cli({"pipeline", "--config", config, "--seed", "3"}, dir).exit_code, 0);
}

TEST(Cli, FlagsWithoutConfig) {
  TempDir dir;
  const auto run = run_cli({"symmetrize", "--seed", "1", "--dictionary",
                            (kToy / "dictionary.tsv").string(), "-o",
                            (dir / "corpus.txt").string()},
                           dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  const auto corpus = BigramCorpus::load(dir / "corpus.txt");
  EXPECT_FALSE(corpus.empty());
}

TEST(Cli, ErrorsAndExitCodes) {
  TempDir dir;
  const auto config = write_config(dir, toy_config_json()).string();
  EXPECT_EQ(run_cli({"frobnicate"}, dir).exit_code, 1);
  EXPECT_EQ(run_cli({"pipeline", "--config", config, "--source-convention", "morse"}, dir)
                .exit_code,
            1);
  std::ofstream(dir / "bad.json") << "{ nope";
  const auto parse = run_cli({"pipeline", "--config", (dir / "bad.json").string()}, dir);
  EXPECT_EQ(parse.exit_code, 1);
  EXPECT_EQ(nlohmann::json::parse(parse.err)["error"], "parse");
  std::ofstream(dir / "plain_file") << "x";
  const auto io = run_cli(
      {"pipeline", "--config", config, "--output-dir", (dir / "plain_file" / "x").string()},
      dir);
  EXPECT_EQ(io.exit_code, 2);
  EXPECT_EQ(nlohmann::json::parse(io.err)["error"], "io");
  const auto missing_input =
      run_cli({"convert", "--config", config, "--mapping", (dir / "none.jsonl").string()}, dir);
  EXPECT_EQ(missing_input.exit_code, 1);
  EXPECT_EQ(nlohmann::json::parse(missing_input.err)["field"], "mapping");
}
