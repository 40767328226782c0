#include "tokbridge/negative_sampling.h"

#include <gtest/gtest.h>

#include <random>

using namespace tokbridge;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows random_rows(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 0.8);
  Rows rows(n, std::vector<double>(dim));
  for (auto& r : rows) for (auto& x : r) x = normal(rng);
  return rows;
}

// Loss written out directly from its definition.
double reference_loss(const Rows& in, const Rows& out) {
  std::vector<double> h(in[0].size(), 0.0);
  for (const auto& r : in) for (std::size_t i = 0; i < h.size(); ++i) h[i] += r[i] / in.size();
  double loss = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) dot += out[j][i] * h[i];
    loss += j == 0 ? -std::log(1.0 / (1.0 + std::exp(-dot)))
                   : -std::log(1.0 / (1.0 + std::exp(dot)));
  }
  return loss;
}

}  // namespace

TEST(NegativeSampling, LossMatchesDefinition) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto in = random_rows(rng, 1 + t % 4, 5);
    const auto out = random_rows(rng, 1 + t % 6, 5);
    EXPECT_NEAR(negative_sampling_loss(in, out), reference_loss(in, out), 1e-12);
  }
}

TEST(NegativeSampling, ZeroOutputsGiveLogTwoPerRow) {
  const Rows in = {{1.0, -2.0}};
  const Rows out = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  EXPECT_NEAR(negative_sampling_loss(in, out), 3 * std::log(2.0), 1e-15);
}

TEST(NegativeSampling, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(3);
  const double h = 1e-4;
  for (int t = 0; t < 30; ++t) {
    const std::size_t dim = 1 + t % 8;
    auto in = random_rows(rng, 1 + t % 3, dim);
    auto out = random_rows(rng, 1 + t % 5, dim);
    const auto g = negative_sampling_gradient(in, out);
    EXPECT_DOUBLE_EQ(g.loss, negative_sampling_loss(in, out));
    const auto check = [&](Rows& rows, const Rows& analytic) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
          const double saved = rows[r][c];
          rows[r][c] = saved + h;
          const double plus = negative_sampling_loss(in, out);
          rows[r][c] = saved - h;
          const double minus = negative_sampling_loss(in, out);
          rows[r][c] = saved;
          const double numeric = (plus - minus) / (2 * h);
          EXPECT_NEAR(analytic[r][c], numeric,
                      1e-4 * std::max({std::abs(numeric), std::abs(analytic[r][c]), 1e-5}));
        }
      }
    };
    check(in, g.input_rows);
    check(out, g.output_rows);
  }
}

TEST(NegativeSampling, InputGradientIsHiddenGradientOverCount) {
  std::mt19937_64 rng(4);
  const auto in = random_rows(rng, 4, 3);
  const auto out = random_rows(rng, 3, 3);
  const auto g = negative_sampling_gradient(in, out);
  for (const auto& row : g.input_rows) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(row[i], g.hidden[i] / 4);
  }
}

TEST(LogisticStep, MatchesExactGradientStep) {
  std::mt19937_64 rng(8);
  const float lr = 0.05f;
  for (int t = 0; t < 10; ++t) {
    const auto in = random_rows(rng, 1, 6);
    const auto out = random_rows(rng, 3, 6);
    const auto g = negative_sampling_gradient(in, out);

    std::vector<float> hidden(in[0].begin(), in[0].end());
    std::vector<float> step(6, 0.0f);
    std::vector<std::vector<float>> rows;
    for (const auto& r : out) rows.emplace_back(r.begin(), r.end());
    double loss = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      loss += logistic_step(hidden, rows[j], j == 0, lr, step);
    }
    EXPECT_NEAR(loss, g.loss, 1e-5);
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_NEAR(step[i], -lr * g.hidden[i], 1e-6);
      for (std::size_t j = 0; j < rows.size(); ++j) {
        EXPECT_NEAR(rows[j][i], float(out[j][i]) - lr * g.output_rows[j][i], 1e-6);
      }
    }
  }
}
