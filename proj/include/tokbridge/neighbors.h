#ifndef TOKBRIDGE_NEIGHBORS_H_
#define TOKBRIDGE_NEIGHBORS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tokbridge/error.h"

namespace tokbridge {

class ZeroQueryError : public Error {
 public:
  ZeroQueryError() : Error("query vector has zero norm") {}
};

class EmptyCandidatesError : public Error {
 public:
  EmptyCandidatesError() : Error("candidate set is empty") {}
};

// A fixed set of (token, vector) candidates with precomputed norms.
class CandidateIndex {
 public:
  explicit CandidateIndex(std::size_t dim) : dim_(dim) {}

  // Throws ValidationError on a dimension mismatch or a zero-norm vector.
  void add(std::string token, std::span<const float> vector);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::string& token(std::size_t i) const { return tokens_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<float> vectors_;
  std::vector<double> norms_;
};

struct Neighbor {
  std::size_t index = 0;  // position in the candidate index
  double cosine = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Exact top-k by cosine similarity, descending; equal scores keep candidate
// order. Returns min(k, size) neighbors.
std::vector<Neighbor> nearest_neighbors(std::span<const float> query,
                                        const CandidateIndex& candidates,
                                        std::size_t k);

double cosine_similarity(std::span<const float> a, std::span<const float> b);

}  // namespace tokbridge

#endif  // TOKBRIDGE_NEIGHBORS_H_
