#include "tokbridge/embedding_io.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "synthetic.h"
#include "tokbridge/error.h"

using namespace tokbridge;
using namespace std::string_literals;

namespace {

EmbeddingTable sample_table() {
  EmbeddingTable t{{"<unk>", "\xE2\x96\x81hond", ","}, Matrix(3, 2)};
  const float values[] = {0.5f, -1.25f, 3.0e-39f, 7.0f, -0.0f, 1e20f};
  std::copy(std::begin(values), std::end(values), t.matrix.data().begin());
  return t;
}

std::string bytes_of(const EmbeddingTable& t) {
  std::ostringstream out;
  write_embeddings(t, out);
  return out.str();
}

}  // namespace

TEST(EmbeddingIo, LayoutIsLittleEndianWithInlineVocab) {
  const std::string b = bytes_of(sample_table());
  ASSERT_EQ(b.substr(0, 8), "T2TEMB01");
  const auto u32 = [&](std::size_t at) {
    return std::uint32_t(std::uint8_t(b[at])) | std::uint32_t(std::uint8_t(b[at + 1])) << 8 |
           std::uint32_t(std::uint8_t(b[at + 2])) << 16 |
           std::uint32_t(std::uint8_t(b[at + 3])) << 24;
  };
  EXPECT_EQ(u32(8), 3u);
  EXPECT_EQ(u32(12), 2u);
  EXPECT_EQ(u32(16), 5u);
  EXPECT_EQ(b.substr(20, 5), "<unk>");
  const std::size_t matrix_at = 20 + 5 + 4 + 7 + 4 + 1;
  EXPECT_EQ(b.size(), matrix_at + 6 * 4);
  float first;
  std::memcpy(&first, b.data() + matrix_at, 4);
  EXPECT_EQ(first, 0.5f);
}

TEST(EmbeddingIo, RoundTripIsBitExact) {
  const auto t = sample_table();
  const std::string first = bytes_of(t);
  std::istringstream in(first);
  const auto back = read_embeddings(in, "mem");
  EXPECT_EQ(back.tokens, t.tokens);
  EXPECT_EQ(std::memcmp(back.matrix.data().data(), t.matrix.data().data(), 6 * sizeof(float)), 0);
  EXPECT_TRUE(std::signbit(back.matrix.row(2)[0]));
  EXPECT_EQ(bytes_of(back), first);

  testing_support::TempDir dir;
  write_embeddings(t, dir / "t.emb");
  EXPECT_EQ(bytes_of(read_embeddings(dir / "t.emb")), first);
}

TEST(EmbeddingIo, NanRowNamesToken) {
  auto t = sample_table();
  t.matrix.row(1)[1] = std::numeric_limits<float>::quiet_NaN();
  try {
    bytes_of(t);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("\xE2\x96\x81hond"), std::string::npos);
  }
  t.matrix.row(1)[1] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(bytes_of(t), ValidationError);
}

TEST(EmbeddingIo, EmptyTableRejected) {
  EXPECT_THROW(bytes_of(EmbeddingTable{{}, Matrix(0, 4)}), ValidationError);
  std::string header = "T2TEMB01";
  header.append("\0\0\0\0\4\0\0\0", 8);
  std::istringstream in(header);
  EXPECT_THROW(read_embeddings(in, "mem"), ValidationError);
}

TEST(EmbeddingIo, RowCountMismatchRejected) {
  EXPECT_THROW(bytes_of(EmbeddingTable{{"a", "b"}, Matrix(3, 2)}), ValidationError);
}

TEST(EmbeddingIo, CorruptInputRejected) {
  const std::string good = bytes_of(sample_table());
  std::string bad_magic = good;
  bad_magic[3] = 'X';
  for (const std::string& b : {bad_magic, good.substr(0, good.size() - 1), good + "\0"s}) {
    std::istringstream in(b);
    EXPECT_THROW(read_embeddings(in, "mem"), ParseError);
  }
  EXPECT_THROW(read_embeddings("/nonexistent/file.emb"), IoError);
}

TEST(EmbeddingIo, CheckMatchesVocabulary) {
  const auto t = sample_table();
  EXPECT_NO_THROW(t.check_matches(Vocabulary(t.tokens, Convention::kSentencePiece)));
  EXPECT_THROW(t.check_matches(Vocabulary({"<unk>", ",", "\xE2\x96\x81hond"},
                                          Convention::kSentencePiece)),
               ValidationError);
}
