#include "tokbridge/embedding_io.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "tokbridge/binary_io.h"
#include "tokbridge/error.h"

namespace tokbridge {
namespace {

constexpr std::string_view kEmbeddingMagic = "T2TEMB01";

}  // namespace

void EmbeddingTable::validate() const {
  if (tokens.empty()) throw ValidationError("vocab", "embedding table is empty");
  if (matrix.rows() != tokens.size()) {
    throw ValidationError("matrix", "row count " + std::to_string(matrix.rows()) +
                                        " != vocab size " +
                                        std::to_string(tokens.size()));
  }
  if (matrix.cols() == 0) throw ValidationError("dim", "must be positive");
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (float v : matrix.row(r)) {
      if (!std::isfinite(v)) {
        throw ValidationError(tokens[r], "non-finite value in row " +
                                             std::to_string(r) + " (token \"" +
                                             tokens[r] + "\")");
      }
    }
  }
}

void EmbeddingTable::check_matches(const Vocabulary& vocab) const {
  if (tokens.size() != vocab.size()) {
    throw ValidationError("vocab", "table has " + std::to_string(tokens.size()) +
                                       " tokens, vocabulary has " +
                                       std::to_string(vocab.size()));
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != vocab.token(i)) {
      throw ValidationError(tokens[i], "table token " + std::to_string(i) +
                                           " differs from vocabulary token \"" +
                                           vocab.token(i) + "\"");
    }
  }
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  table.validate();
  if (table.tokens.size() > std::numeric_limits<std::uint32_t>::max() ||
      table.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("matrix", "table too large for the exchange format");
  }
  BinaryWriter w(out);
  w.magic(kEmbeddingMagic);
  w.u32(static_cast<std::uint32_t>(table.tokens.size()));
  w.u32(static_cast<std::uint32_t>(table.dim()));
  for (const auto& token : table.tokens) w.string(token);
  w.floats(table.matrix.data());
}

void write_embeddings(const EmbeddingTable& table,
                      const std::filesystem::path& path) {
  table.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create embeddings " + path.string());
  write_embeddings(table, out);
}

EmbeddingTable read_embeddings(std::istream& in, const std::string& source_name) {
  BinaryReader r(in, source_name);
  r.expect_magic(kEmbeddingMagic);
  const std::uint32_t vocab_size = r.u32();
  const std::uint32_t dim = r.u32();
  if (vocab_size == 0) throw ValidationError("vocab", "embedding table is empty");
  if (dim == 0) throw ValidationError("dim", "must be positive");

  EmbeddingTable table;
  table.tokens.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    table.tokens.push_back(r.string());
  }
  table.matrix = Matrix(vocab_size, dim);
  r.floats(table.matrix.data());
  if (!r.at_end()) throw ParseError(source_name, 0, "trailing bytes");
  table.validate();
  return table;
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  return read_embeddings(in, path.string());
}

}  // namespace tokbridge
