#ifndef TOKBRIDGE_CONVERTER_H_
#define TOKBRIDGE_CONVERTER_H_

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tokbridge/embedding_io.h"
#include "tokbridge/token_mapper.h"
#include "tokbridge/vocab.h"

namespace tokbridge {

struct ConversionReportRow {
  std::size_t target_id = 0;
  Provenance route = Provenance::kUnkFallback;
  std::size_t candidates = 0;
  double weight_entropy = 0.0;  // nats
  double norm = 0.0;
};

struct ConversionResult {
  EmbeddingTable table;
  std::vector<ConversionReportRow> rows;
};

// Each target row is the weighted sum of its candidates' source rows,
// accumulated in double and stored as f32.
ConversionResult convert(const EmbeddingTable& source,
                         const TokenMapping& mapping,
                         const Vocabulary& target_vocab, unsigned threads = 1);

void write_conversion_rows(const std::vector<ConversionReportRow>& rows,
                           const EmbeddingTable& table, std::ostream& out);

struct Violation {
  std::size_t row = 0;
  std::string token;
  std::string reason;
};

struct VerifyReport {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<Violation> violations;
  std::optional<std::size_t> unk_id;
  std::size_t unk_rows = 0;  // rows other than unk's own that equal it bitwise

  bool ok() const { return violations.empty(); }
};

// Report-only health check; never throws on bad content.
VerifyReport verify(const EmbeddingTable& table, const RoleTable& roles = {});

}  // namespace tokbridge

#endif  // TOKBRIDGE_CONVERTER_H_
