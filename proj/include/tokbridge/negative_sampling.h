#ifndef TOKBRIDGE_NEGATIVE_SAMPLING_H_
#define TOKBRIDGE_NEGATIVE_SAMPLING_H_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tokbridge {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Binary-logistic negative-sampling objective for one (input word, context)
// instance. The hidden vector is the mean of `input_rows`; `output_rows[0]`
// is the observed context and the remaining rows are noise words:
//
//   loss = -log s(u_0 . h) - sum_{j>0} log s(-u_j . h),  h = mean(input_rows)
//
// Gradients are exact partial derivatives of `loss`.
struct NegativeSamplingGradient {
  double loss = 0.0;
  std::vector<double> hidden;                   // dloss/dh
  std::vector<std::vector<double>> input_rows;  // dloss/d input_rows[i]
  std::vector<std::vector<double>> output_rows; // dloss/d output_rows[j]
};

double negative_sampling_loss(
    const std::vector<std::vector<double>>& input_rows,
    const std::vector<std::vector<double>>& output_rows);

NegativeSamplingGradient negative_sampling_gradient(
    const std::vector<std::vector<double>>& input_rows,
    const std::vector<std::vector<double>>& output_rows);

// In-place SGD step on one context row, as used by the trainer.
// `label` is 1 for the observed context, 0 for a noise word. Accumulates
// -lr * dloss/dh into `hidden_step` and updates `output_row` by
// -lr * dloss/du (computed from the pre-update row). Returns the loss term.
inline double logistic_step(std::span<const float> hidden,
                            std::span<float> output_row, bool label, float lr,
                            std::span<float> hidden_step) {
  double dot = 0.0;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    dot += static_cast<double>(hidden[i]) * output_row[i];
  }
  const double score = sigmoid(dot);
  const float alpha =
      lr * static_cast<float>((label ? 1.0 : 0.0) - score);
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    hidden_step[i] += alpha * output_row[i];
  }
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    output_row[i] += alpha * hidden[i];
  }
  return label ? -std::log(score) : -std::log(1.0 - score);
}

}  // namespace tokbridge

#endif  // TOKBRIDGE_NEGATIVE_SAMPLING_H_
