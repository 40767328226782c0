#include "tokbridge/neighbors.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tokbridge;

namespace {

CandidateIndex index_of(const std::vector<std::vector<float>>& vecs) {
  CandidateIndex index(vecs.at(0).size());
  for (std::size_t i = 0; i < vecs.size(); ++i) index.add("c" + std::to_string(i), vecs[i]);
  return index;
}

}  // namespace

TEST(NearestNeighbors, SelfQueryRanksFirst) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> normal;
  std::vector<std::vector<float>> vecs(12, std::vector<float>(6));
  for (auto& v : vecs) for (float& x : v) x = normal(rng);
  const auto index = index_of(vecs);
  for (std::size_t c = 0; c < vecs.size(); ++c) {
    const auto top = nearest_neighbors(vecs[c], index, 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].index, c);
    EXPECT_NEAR(top[0].cosine, 1.0, 1e-6);
  }
}

TEST(NearestNeighbors, OrthogonalQueryKeepsCandidateOrder) {
  const auto index = index_of({{0, 1, 0}, {0, 0, 2}, {0, -3, 1}, {0, 1, 1}});
  const auto top = nearest_neighbors(std::vector<float>{5, 0, 0}, index, 4);
  ASSERT_EQ(top.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(top[i].index, i);
    EXPECT_EQ(top[i].cosine, 0.0);
  }
}

TEST(NearestNeighbors, DescendingWithTiesByIndex) {
  const auto index = index_of({{1, 0}, {0, 1}, {2, 0}, {1, 1}, {-1, 0}});
  const auto top = nearest_neighbors(std::vector<float>{1, 0}, index, 5);
  std::vector<std::size_t> order;
  for (const auto& n : top) order.push_back(n.index);
  EXPECT_EQ(order, (std::vector<std::size_t>{0, 2, 3, 1, 4}));
  EXPECT_EQ(top[4].cosine, -1.0);
}

TEST(NearestNeighbors, KLargerThanCandidates) {
  const auto index = index_of({{1, 0}, {0, 1}});
  EXPECT_EQ(nearest_neighbors(std::vector<float>{1, 1}, index, 10).size(), 2u);
}

TEST(NearestNeighbors, MatchesBruteForceOnRandomSets) {
  std::mt19937_64 rng(10);
  std::normal_distribution<float> normal;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<float>> vecs(10, std::vector<float>(5));
    for (auto& v : vecs) for (float& x : v) x = normal(rng);
    std::vector<float> q(5);
    for (float& x : q) x = normal(rng);
    // Naive: compute all scores, pick maxima one by one.
    std::vector<double> score;
    for (const auto& v : vecs) {
      double d = 0, nq = 0, nv = 0;
      for (int i = 0; i < 5; ++i) {
        d += double(q[i]) * v[i];
        nq += double(q[i]) * q[i];
        nv += double(v[i]) * v[i];
      }
      score.push_back(d / (std::sqrt(nq) * std::sqrt(nv)));
    }
    std::vector<std::size_t> expect;
    std::vector<bool> used(10, false);
    for (int r = 0; r < 3; ++r) {
      std::size_t best = 10;
      for (std::size_t i = 0; i < 10; ++i) {
        if (!used[i] && (best == 10 || score[i] > score[best])) best = i;
      }
      used[best] = true;
      expect.push_back(best);
    }
    const auto top = nearest_neighbors(q, index_of(vecs), 3);
    for (int r = 0; r < 3; ++r) {
      EXPECT_EQ(top[r].index, expect[r]);
      EXPECT_NEAR(top[r].cosine, score[expect[r]], 1e-12);
    }
  }
}

TEST(NearestNeighbors, ErrorsAreDistinct) {
  const auto index = index_of({{1, 0}});
  EXPECT_THROW(nearest_neighbors(std::vector<float>{0, 0}, index, 1), ZeroQueryError);
  EXPECT_THROW(nearest_neighbors(std::vector<float>{1, 0}, CandidateIndex(2), 1),
               EmptyCandidatesError);
  EXPECT_THROW(nearest_neighbors(std::vector<float>{1, 0}, index, 0), ValidationError);
  EXPECT_THROW(nearest_neighbors(std::vector<float>{1, 0, 0}, index, 1), ValidationError);
}

TEST(CandidateIndex, RejectsZeroAndMismatchedVectors) {
  CandidateIndex index(2);
  EXPECT_THROW(index.add("z", std::vector<float>{0, 0}), ValidationError);
  EXPECT_THROW(index.add("d", std::vector<float>{1, 2, 3}), ValidationError);
  index.add("ok", std::vector<float>{3, 4});
  EXPECT_EQ(index.size(), 1u);
  EXPECT_DOUBLE_EQ(index.norm(0), 5.0);
  EXPECT_EQ(index.token(0), "ok");
}

TEST(CosineSimilarity, Basics) {
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 3}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<float>{2, 2}, std::vector<float>{1, 1}), 1.0);
  EXPECT_EQ(cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 1}), 0.0);
}
