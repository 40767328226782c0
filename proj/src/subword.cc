#include "tokbridge/subword.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include "tokbridge/binary_io.h"
#include "tokbridge/error.h"
#include "tokbridge/negative_sampling.h"
#include "tokbridge/utf8.h"

namespace tokbridge {
namespace {

constexpr std::string_view kModelMagic = "T2TSUBW1";
constexpr std::size_t kNegativeTableSize = 1'000'000;
constexpr double kNegativePower = 0.75;

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data().data(), b.data().data(),
                     a.data().size_bytes()) == 0;
}

void check_finite(const Matrix& m, std::string_view name) {
  for (float v : m.data()) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(name), "non-finite model parameter");
    }
  }
}

}  // namespace

void SubwordConfig::validate() const {
  if (dim == 0) throw ValidationError("dim", "must be positive");
  if (min_n == 0) throw ValidationError("min_n", "must be positive");
  if (max_n < min_n) throw ValidationError("max_n", "must be >= min_n");
  if (epochs == 0) throw ValidationError("epochs", "must be positive");
  if (negatives == 0) throw ValidationError("negatives", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate", "must be positive");
  }
  if (bucket_count == 0) {
    throw ValidationError("bucket_count", "must be positive");
  }
}

std::vector<std::string> extract_ngrams(std::string_view word,
                                        std::uint32_t min_n,
                                        std::uint32_t max_n) {
  std::string wrapped;
  wrapped.reserve(word.size() + 2);
  wrapped.push_back('<');
  wrapped.append(word);
  wrapped.push_back('>');

  const auto bounds = utf8::boundaries(wrapped);
  const std::size_t length = bounds.size() - 1;
  std::vector<std::string> ngrams;
  for (std::size_t n = min_n; n <= max_n && n <= length; ++n) {
    for (std::size_t i = 0; i + n <= length; ++i) {
      ngrams.emplace_back(wrapped, bounds[i], bounds[i + n] - bounds[i]);
    }
  }
  return ngrams;
}

std::uint32_t fnv1a_32(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h;
}

std::uint64_t hash_ngram(std::string_view ngram, std::uint64_t bucket_count) {
  return fnv1a_32(ngram) % bucket_count;
}

double learning_rate_at(std::uint64_t step, std::uint64_t total,
                        double initial) {
  if (total <= 1) return initial;
  const double progress =
      static_cast<double>(step) / static_cast<double>(total - 1);
  return initial * std::max(0.0, 1.0 - progress);
}

SubwordModel::SubwordModel(SubwordConfig config, std::vector<VocabWord> vocab)
    : config_(config),
      vocab_(std::move(vocab)),
      word_input_(vocab_.size(), config.dim),
      ngram_input_(config.bucket_count, config.dim),
      output_(vocab_.size(), config.dim) {
  config_.validate();
  build_index();
  build_negative_table();
}

void SubwordModel::build_index() {
  index_.clear();
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i].text, i).second) {
      throw ValidationError(vocab_[i].text, "duplicate vocabulary word");
    }
  }
}

void SubwordModel::build_negative_table() {
  negative_table_.clear();
  double z = 0.0;
  for (const auto& w : vocab_) {
    z += std::pow(static_cast<double>(w.count), kNegativePower);
  }
  if (z <= 0.0) return;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    const double share =
        std::pow(static_cast<double>(vocab_[i].count), kNegativePower) / z;
    const auto slots = static_cast<std::size_t>(
        std::ceil(share * static_cast<double>(kNegativeTableSize)));
    negative_table_.insert(negative_table_.end(), slots,
                           static_cast<std::uint32_t>(i));
  }
}

std::optional<std::size_t> SubwordModel::word_id(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint64_t> SubwordModel::ngram_buckets(
    std::string_view word) const {
  std::vector<std::uint64_t> buckets;
  for (const auto& gram : extract_ngrams(word, config_.min_n, config_.max_n)) {
    buckets.push_back(hash_ngram(gram, config_.bucket_count));
  }
  return buckets;
}

WordVector SubwordModel::input_vector(std::string_view word,
                                      bool in_vocab) const {
  WordVector result;
  result.values.assign(config_.dim, 0.0f);
  std::size_t rows = 0;
  if (in_vocab) {
    const auto id = word_id(word);
    if (!id) {
      throw ValidationError(std::string(word), "word is not in the vocabulary");
    }
    const auto row = word_input_.row(*id);
    for (std::size_t i = 0; i < row.size(); ++i) result.values[i] += row[i];
    ++rows;
  }
  for (std::uint64_t bucket : ngram_buckets(word)) {
    const auto row = ngram_input_.row(bucket);
    for (std::size_t i = 0; i < row.size(); ++i) result.values[i] += row[i];
    ++rows;
  }
  if (rows == 0) {
    result.empty = true;
    return result;
  }
  const float scale = 1.0f / static_cast<float>(rows);
  for (float& v : result.values) v *= scale;
  return result;
}

WordVector SubwordModel::embed(std::string_view word) const {
  return input_vector(word, word_id(word).has_value());
}

void SubwordModel::write(std::ostream& out) const {
  check_finite(word_input_, "word_input");
  check_finite(ngram_input_, "ngram_input");
  check_finite(output_, "output");

  BinaryWriter w(out);
  w.magic(kModelMagic);
  w.u32(config_.dim);
  w.u32(config_.min_n);
  w.u32(config_.max_n);
  w.u32(config_.epochs);
  w.u32(config_.negatives);
  w.f64(config_.learning_rate);
  w.u64(config_.bucket_count);
  w.u64(config_.seed);
  w.u64(vocab_.size());
  for (const auto& word : vocab_) {
    w.string(word.text);
    w.u64(word.count);
  }
  w.floats(word_input_.data());
  w.floats(ngram_input_.data());
  w.floats(output_.data());
}

void SubwordModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create model " + path.string());
  write(out);
}

SubwordModel SubwordModel::read(std::istream& in,
                                const std::string& source_name) {
  BinaryReader r(in, source_name);
  r.expect_magic(kModelMagic);
  SubwordConfig config;
  config.dim = r.u32();
  config.min_n = r.u32();
  config.max_n = r.u32();
  config.epochs = r.u32();
  config.negatives = r.u32();
  config.learning_rate = r.f64();
  config.bucket_count = r.u64();
  config.seed = r.u64();
  config.validate();

  const std::uint64_t vocab_size = r.u64();
  std::vector<VocabWord> vocab;
  vocab.reserve(std::min<std::uint64_t>(vocab_size, 1u << 24));
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    VocabWord word;
    word.text = r.string();
    word.count = r.u64();
    vocab.push_back(std::move(word));
  }
  SubwordModel model(config, std::move(vocab));
  r.floats(model.word_input_.data());
  r.floats(model.ngram_input_.data());
  r.floats(model.output_.data());
  if (!r.at_end()) throw ParseError(source_name, 0, "trailing bytes");
  return model;
}

SubwordModel SubwordModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  return read(in, path.string());
}

bool operator==(const SubwordModel& a, const SubwordModel& b) {
  return a.config_ == b.config_ && a.vocab_ == b.vocab_ &&
         bit_equal(a.word_input_, b.word_input_) &&
         bit_equal(a.ngram_input_, b.ngram_input_) &&
         bit_equal(a.output_, b.output_);
}

// Owns the mutable training state behind SubwordModel's immutable surface.
class SubwordTrainer {
 public:
  SubwordTrainer(const BigramCorpus& corpus, const SubwordConfig& config)
      : model_(config, collect_vocab(corpus)) {
    lines_.reserve(corpus.size());
    for (const auto& line : corpus.lines()) {
      lines_.push_back({*model_.word_id(line.left),
                        *model_.word_id(line.right)});
    }
    input_rows_.resize(model_.vocab_.size());
    for (std::size_t i = 0; i < model_.vocab_.size(); ++i) {
      input_rows_[i] = model_.ngram_buckets(model_.vocab_[i].text);
    }
    initialize();
  }

  SubwordModel run(unsigned threads, TrainingStats* stats) {
    const auto& config = model_.config_;
    const std::uint64_t total =
        static_cast<std::uint64_t>(lines_.size()) * config.epochs;
    threads = std::max(1u, threads);

    std::vector<std::size_t> order(lines_.size());
    std::mt19937_64 order_rng(config.seed ^ 0x9E3779B97F4A7C15ull);
    std::vector<std::mt19937_64> lane_rngs;
    for (unsigned t = 0; t < threads; ++t) {
      lane_rngs.emplace_back(config.seed + 1 + t);
    }

    std::atomic<std::uint64_t> step{0};
    double last_epoch_loss = 0.0;
    double last_lr = config.learning_rate;
    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), order_rng);

      std::vector<double> lane_loss(threads, 0.0);
      const auto lane = [&](unsigned t) {
        const std::size_t begin = order.size() * t / threads;
        const std::size_t end = order.size() * (t + 1) / threads;
        std::vector<float> hidden(config.dim);
        std::vector<float> hidden_step(config.dim);
        for (std::size_t k = begin; k < end; ++k) {
          const std::uint64_t s = step.fetch_add(1, std::memory_order_relaxed);
          const auto lr = static_cast<float>(
              learning_rate_at(s, total, config.learning_rate));
          lane_loss[t] += update(lines_[order[k]], lr, lane_rngs[t], hidden,
                                 hidden_step);
          if (t == 0) last_lr = lr;
        }
      };
      if (threads == 1) {
        lane(0);
      } else {
        std::vector<std::thread> workers;
        for (unsigned t = 0; t < threads; ++t) workers.emplace_back(lane, t);
        for (auto& w : workers) w.join();
      }
      double sum = 0.0;
      for (double l : lane_loss) sum += l;
      last_epoch_loss = lines_.empty() ? 0.0 : sum / lines_.size();
    }

    if (stats) {
      stats->updates = step.load();
      stats->final_learning_rate = last_lr;
      stats->mean_loss_last_epoch = last_epoch_loss;
    }
    return std::move(model_);
  }

 private:
  struct Line {
    std::size_t input;
    std::size_t context;
  };

  static std::vector<VocabWord> collect_vocab(const BigramCorpus& corpus) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<VocabWord> vocab;
    const auto add = [&](const std::string& w) {
      auto [it, inserted] = index.emplace(w, vocab.size());
      if (inserted) vocab.push_back({w, 0});
      ++vocab[it->second].count;
    };
    for (const auto& line : corpus.lines()) {
      add(line.left);
      add(line.right);
    }
    std::stable_sort(vocab.begin(), vocab.end(),
                     [](const VocabWord& a, const VocabWord& b) {
                       return a.count > b.count;
                     });
    return vocab;
  }

  void initialize() {
    const float bound = 1.0f / static_cast<float>(model_.config_.dim);
    std::mt19937_64 rng(model_.config_.seed);
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float& v : model_.word_input_.data()) v = dist(rng);
    for (float& v : model_.ngram_input_.data()) v = dist(rng);
  }

  std::uint32_t sample_negative(std::size_t context, std::mt19937_64& rng) {
    const auto& table = model_.negative_table_;
    std::uniform_int_distribution<std::size_t> pick(0, table.size() - 1);
    while (true) {
      const std::uint32_t candidate = table[pick(rng)];
      if (candidate != context) return candidate;
    }
  }

  double update(const Line& line, float lr, std::mt19937_64& rng,
                std::vector<float>& hidden, std::vector<float>& hidden_step) {
    const auto& buckets = input_rows_[line.input];
    const std::size_t dim = hidden.size();

    std::fill(hidden.begin(), hidden.end(), 0.0f);
    std::fill(hidden_step.begin(), hidden_step.end(), 0.0f);
    const auto word_row = model_.word_input_.row(line.input);
    for (std::size_t i = 0; i < dim; ++i) hidden[i] += word_row[i];
    for (std::uint64_t b : buckets) {
      const auto row = model_.ngram_input_.row(b);
      for (std::size_t i = 0; i < dim; ++i) hidden[i] += row[i];
    }
    const float scale = 1.0f / static_cast<float>(buckets.size() + 1);
    for (float& v : hidden) v *= scale;

    double loss = logistic_step(hidden, model_.output_.row(line.context), true,
                                lr, hidden_step);
    // A one-word vocabulary has no noise words to draw from.
    if (model_.vocab_.size() > 1) {
      for (std::uint32_t n = 0; n < model_.config_.negatives; ++n) {
        const std::uint32_t neg = sample_negative(line.context, rng);
        loss += logistic_step(hidden, model_.output_.row(neg), false, lr,
                              hidden_step);
      }
    }

    // Every contributing row takes the full hidden-vector step.
    for (std::size_t i = 0; i < dim; ++i) word_row[i] += hidden_step[i];
    for (std::uint64_t b : buckets) {
      const auto row = model_.ngram_input_.row(b);
      for (std::size_t i = 0; i < dim; ++i) row[i] += hidden_step[i];
    }
    return loss;
  }

  SubwordModel model_;
  std::vector<Line> lines_;
  std::vector<std::vector<std::uint64_t>> input_rows_;
};

SubwordModel train_subword(const BigramCorpus& corpus,
                           const SubwordConfig& config, unsigned threads,
                           TrainingStats* stats) {
  config.validate();
  if (corpus.empty()) throw ValidationError("corpus", "corpus is empty");
  SubwordTrainer trainer(corpus, config);
  return trainer.run(threads, stats);
}

}  // namespace tokbridge
