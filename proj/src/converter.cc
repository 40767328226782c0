#include "tokbridge/converter.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <thread>

#include "tokbridge/error.h"

namespace tokbridge {

ConversionResult convert(const EmbeddingTable& source,
                         const TokenMapping& mapping,
                         const Vocabulary& target_vocab, unsigned threads) {
  source.validate();
  if (mapping.size() != target_vocab.size()) {
    throw ValidationError("mapping", "mapping covers " +
                                         std::to_string(mapping.size()) +
                                         " tokens, target vocabulary has " +
                                         std::to_string(target_vocab.size()));
  }
  for (std::size_t t = 0; t < mapping.size(); ++t) {
    if (mapping.tokens[t].candidates.empty()) {
      throw ValidationError(target_vocab.token(t), "token has no candidates");
    }
    for (const auto& c : mapping.tokens[t].candidates) {
      if (c.source_id >= source.tokens.size()) {
        throw ValidationError(target_vocab.token(t),
                              "source id " + std::to_string(c.source_id) +
                                  " exceeds source table rows " +
                                  std::to_string(source.tokens.size()));
      }
    }
  }

  const std::size_t dim = source.dim();
  ConversionResult result;
  result.table.tokens = target_vocab.tokens();
  result.table.matrix = Matrix(target_vocab.size(), dim);
  result.rows.resize(target_vocab.size());

  const unsigned lanes = std::max(1u, threads);
  const auto lane = [&](unsigned lane_id) {
    std::vector<double> acc(dim);
    for (std::size_t t = lane_id; t < mapping.size(); t += lanes) {
      const TokenMatch& match = mapping.tokens[t];
      std::fill(acc.begin(), acc.end(), 0.0);
      double entropy = 0.0;
      for (const auto& c : match.candidates) {
        const auto src = source.matrix.row(c.source_id);
        for (std::size_t i = 0; i < dim; ++i) acc[i] += c.weight * src[i];
        if (c.weight > 0.0) entropy -= c.weight * std::log(c.weight);
      }
      auto out = result.table.matrix.row(t);
      double norm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        out[i] = static_cast<float>(acc[i]);
        norm += static_cast<double>(out[i]) * out[i];
      }
      result.rows[t] = {t, match.route, match.candidates.size(), entropy,
                        std::sqrt(norm)};
    }
  };
  if (lanes == 1) {
    lane(0);
  } else {
    std::vector<std::thread> workers;
    for (unsigned i = 0; i < lanes; ++i) workers.emplace_back(lane, i);
    for (auto& w : workers) w.join();
  }

  for (std::size_t t = 0; t < result.rows.size(); ++t) {
    if (!std::isfinite(result.rows[t].norm)) {
      throw ValidationError(target_vocab.token(t),
                            "converted row is not finite (token \"" +
                                target_vocab.token(t) + "\")");
    }
  }
  return result;
}

void write_conversion_rows(const std::vector<ConversionReportRow>& rows,
                           const EmbeddingTable& table, std::ostream& out) {
  out << "target_id\ttarget_token\tcase\tcandidates\tweight_entropy\tnorm\n";
  out << std::setprecision(6);
  for (const auto& row : rows) {
    out << row.target_id << '\t' << table.tokens.at(row.target_id) << '\t'
        << to_string(row.route) << '\t' << row.candidates << '\t'
        << row.weight_entropy << '\t' << row.norm << '\n';
  }
}

VerifyReport verify(const EmbeddingTable& table, const RoleTable& roles) {
  VerifyReport report;
  report.rows = table.matrix.rows();
  report.dim = table.matrix.cols();

  if (table.tokens.empty()) {
    report.violations.push_back({0, "", "empty vocabulary"});
  }
  if (table.matrix.rows() != table.tokens.size()) {
    report.violations.push_back(
        {0, "", "row count " + std::to_string(table.matrix.rows()) +
                    " != vocab size " + std::to_string(table.tokens.size())});
    return report;
  }

  for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
    const auto row = table.matrix.row(r);
    if (!std::all_of(row.begin(), row.end(),
                     [](float v) { return std::isfinite(v); })) {
      report.violations.push_back({r, table.tokens[r], "non-finite value"});
    }
  }

  const auto& unk_names = roles.names.at(SpecialRole::kUnk);
  for (std::size_t r = 0; r < table.tokens.size() && !report.unk_id; ++r) {
    if (std::find(unk_names.begin(), unk_names.end(), table.tokens[r]) !=
        unk_names.end()) {
      report.unk_id = r;
    }
  }
  if (report.unk_id) {
    const auto unk = table.matrix.row(*report.unk_id);
    for (std::size_t r = 0; r < table.matrix.rows(); ++r) {
      if (r == *report.unk_id) continue;
      if (std::memcmp(table.matrix.row(r).data(), unk.data(),
                      unk.size_bytes()) == 0) {
        ++report.unk_rows;
      }
    }
  }
  return report;
}

}  // namespace tokbridge
