#ifndef TOKBRIDGE_EMBEDDING_IO_H_
#define TOKBRIDGE_EMBEDDING_IO_H_

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tokbridge/matrix.h"
#include "tokbridge/vocab.h"

namespace tokbridge {

// Token embedding table as carried by the exchange format. Row i embeds
// tokens[i].
struct EmbeddingTable {
  std::vector<std::string> tokens;
  Matrix matrix;

  std::size_t dim() const { return matrix.cols(); }

  // Throws ValidationError on an empty table, a row-count mismatch or a
  // non-finite cell (the error names the token).
  void validate() const;
  // Throws ValidationError unless the tokens equal `vocab` in order.
  void check_matches(const Vocabulary& vocab) const;
};

// Exchange format: "T2TEMB01", u32 vocab size, u32 dim, u32-length-prefixed
// UTF-8 tokens, then the f32 matrix row-major, all little-endian.
void write_embeddings(const EmbeddingTable& table, std::ostream& out);
void write_embeddings(const EmbeddingTable& table,
                      const std::filesystem::path& path);
EmbeddingTable read_embeddings(std::istream& in, const std::string& source_name);
EmbeddingTable read_embeddings(const std::filesystem::path& path);

}  // namespace tokbridge

#endif  // TOKBRIDGE_EMBEDDING_IO_H_
