#include "tokbridge/negative_sampling.h"

#include <cassert>

namespace tokbridge {
namespace {

std::vector<double> mean_rows(const std::vector<std::vector<double>>& rows) {
  assert(!rows.empty());
  std::vector<double> mean(rows.front().size(), 0.0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row[i];
  }
  for (double& v : mean) v /= static_cast<double>(rows.size());
  return mean;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

// -log s(x), evaluated without overflow for large |x|.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

}  // namespace

double negative_sampling_loss(
    const std::vector<std::vector<double>>& input_rows,
    const std::vector<std::vector<double>>& output_rows) {
  const auto hidden = mean_rows(input_rows);
  double loss = 0.0;
  for (std::size_t j = 0; j < output_rows.size(); ++j) {
    const double z = dot(output_rows[j], hidden);
    loss += j == 0 ? neg_log_sigmoid(z) : neg_log_sigmoid(-z);
  }
  return loss;
}

NegativeSamplingGradient negative_sampling_gradient(
    const std::vector<std::vector<double>>& input_rows,
    const std::vector<std::vector<double>>& output_rows) {
  NegativeSamplingGradient grad;
  const auto hidden = mean_rows(input_rows);
  const std::size_t dim = hidden.size();
  grad.hidden.assign(dim, 0.0);
  grad.output_rows.reserve(output_rows.size());

  for (std::size_t j = 0; j < output_rows.size(); ++j) {
    const double z = dot(output_rows[j], hidden);
    // d/dz of -log s(z) is s(z) - 1; of -log s(-z) it is s(z).
    const double coeff = j == 0 ? sigmoid(z) - 1.0 : sigmoid(z);
    grad.loss += j == 0 ? neg_log_sigmoid(z) : neg_log_sigmoid(-z);
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      out[i] = coeff * hidden[i];
      grad.hidden[i] += coeff * output_rows[j][i];
    }
    grad.output_rows.push_back(std::move(out));
  }

  const double share = 1.0 / static_cast<double>(input_rows.size());
  grad.input_rows.assign(input_rows.size(), std::vector<double>(dim));
  for (auto& row : grad.input_rows) {
    for (std::size_t i = 0; i < dim; ++i) row[i] = share * grad.hidden[i];
  }
  return grad;
}

}  // namespace tokbridge
