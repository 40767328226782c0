#ifndef TOKBRIDGE_SUBWORD_H_
#define TOKBRIDGE_SUBWORD_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokbridge/dictionary.h"
#include "tokbridge/matrix.h"

namespace tokbridge {

struct SubwordConfig {
  std::uint32_t dim = 64;
  std::uint32_t min_n = 4;
  std::uint32_t max_n = 7;
  std::uint32_t epochs = 5;
  std::uint32_t negatives = 5;
  double learning_rate = 0.05;
  std::uint64_t bucket_count = 2'000'000;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SubwordConfig&, const SubwordConfig&) = default;
};

// Character n-grams of `word` after wrapping it in '<' and '>', enumerated
// over code points: all length-min_n grams left to right, then min_n + 1,
// and so on up to max_n.
std::vector<std::string> extract_ngrams(std::string_view word,
                                        std::uint32_t min_n,
                                        std::uint32_t max_n);

// 32-bit FNV-1a over the UTF-8 bytes.
std::uint32_t fnv1a_32(std::string_view bytes);
std::uint64_t hash_ngram(std::string_view ngram, std::uint64_t bucket_count);

// Linear decay from `initial` at step 0 to exactly 0 at step total - 1.
double learning_rate_at(std::uint64_t step, std::uint64_t total,
                        double initial);

struct WordVector {
  std::vector<float> values;
  // Set when no row contributed (OOV word without qualifying n-grams); the
  // values are then all zero.
  bool empty = false;
};

struct VocabWord {
  std::string text;
  std::uint64_t count = 0;

  friend bool operator==(const VocabWord&, const VocabWord&) = default;
};

// Skipgram model with character n-gram input rows. Immutable once trained
// or loaded, so concurrent readers are safe.
class SubwordModel {
 public:
  SubwordModel(SubwordConfig config, std::vector<VocabWord> vocab);

  const SubwordConfig& config() const { return config_; }
  const std::vector<VocabWord>& vocab() const { return vocab_; }
  std::optional<std::size_t> word_id(std::string_view word) const;

  const Matrix& word_input() const { return word_input_; }
  const Matrix& ngram_input() const { return ngram_input_; }
  const Matrix& output() const { return output_; }
  const std::vector<std::uint32_t>& negative_table() const {
    return negative_table_;
  }

  // Bucket rows of the n-grams of `word`.
  std::vector<std::uint64_t> ngram_buckets(std::string_view word) const;

  // In-vocab: mean of the word row and its n-gram rows. Out-of-vocab: mean
  // of the n-gram rows. Throws ValidationError if `in_vocab` is set for a
  // word outside the vocabulary.
  WordVector input_vector(std::string_view word, bool in_vocab) const;
  // Picks the in-vocab form whenever the word is a vocabulary member.
  WordVector embed(std::string_view word) const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static SubwordModel read(std::istream& in, const std::string& source_name);
  static SubwordModel load(const std::filesystem::path& path);

  friend bool operator==(const SubwordModel& a, const SubwordModel& b);

 private:
  friend class SubwordTrainer;

  void build_index();
  void build_negative_table();

  SubwordConfig config_;
  std::vector<VocabWord> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  Matrix word_input_;
  Matrix ngram_input_;
  Matrix output_;
  std::vector<std::uint32_t> negative_table_;
};

struct TrainingStats {
  std::uint64_t updates = 0;
  double final_learning_rate = 0.0;
  double mean_loss_last_epoch = 0.0;
};

// Trains on a bigram corpus: every line (a, b) is one negative-sampling
// update predicting b from the input vector of a. threads == 1 is
// bit-deterministic for a fixed seed; more threads race on shared rows.
SubwordModel train_subword(const BigramCorpus& corpus,
                           const SubwordConfig& config, unsigned threads = 1,
                           TrainingStats* stats = nullptr);

}  // namespace tokbridge

#endif  // TOKBRIDGE_SUBWORD_H_
