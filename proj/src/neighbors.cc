#include "tokbridge/neighbors.h"

#include <algorithm>
#include <cmath>

namespace tokbridge {
namespace {

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * b[i];
  }
  return sum;
}

}  // namespace

void CandidateIndex::add(std::string token, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw ValidationError(token, "candidate dimension " +
                                     std::to_string(vector.size()) +
                                     " != " + std::to_string(dim_));
  }
  const double n = l2_norm(vector);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError(token, "candidate vector has zero or invalid norm");
  }
  tokens_.push_back(std::move(token));
  vectors_.insert(vectors_.end(), vector.begin(), vector.end());
  norms_.push_back(n);
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<Neighbor> nearest_neighbors(std::span<const float> query,
                                        const CandidateIndex& candidates,
                                        std::size_t k) {
  if (k == 0) throw ValidationError("k", "must be at least 1");
  if (candidates.empty()) throw EmptyCandidatesError();
  if (query.size() != candidates.dim()) {
    throw ValidationError("query", "dimension mismatch");
  }
  const double query_norm = l2_norm(query);
  if (!(query_norm > 0.0)) throw ZeroQueryError();

  std::vector<Neighbor> scored(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scored[i].index = i;
    scored[i].cosine = dot(query, candidates.vector(i)) /
                       (query_norm * candidates.norm(i));
  }
  const std::size_t top = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + top, scored.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      if (a.cosine != b.cosine) return a.cosine > b.cosine;
                      return a.index < b.index;
                    });
  scored.resize(top);
  return scored;
}

}  // namespace tokbridge
