/*
 * Copyright 2026 The mvgp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mvgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace mvgp {

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  require(!truth.empty(), ErrorCode::kEmptyInput, "accuracy of an empty set");
  require(predicted.size() == truth.size(), ErrorCode::kDimensionMismatch,
          std::to_string(predicted.size()) + " predictions for " + std::to_string(truth.size()) +
              " labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

int ece_bin(double confidence, int num_bins) {
  require(confidence >= 0.0 && confidence <= 1.0, ErrorCode::kConfidenceOutOfRange,
          "confidence " + std::to_string(confidence) + " outside [0, 1]");
  const double k_count = static_cast<double>(num_bins);
  int k = static_cast<int>(std::ceil(confidence * k_count));
  // Guard the product against rounding across an edge.
  if (k > 1 && confidence <= static_cast<double>(k - 1) / k_count) --k;
  if (k < num_bins && confidence > static_cast<double>(k) / k_count) ++k;
  return std::clamp(k, 1, num_bins) - 1;
}

double ece(std::span<const double> confidences, const std::vector<bool>& correct, int num_bins) {
  require(num_bins >= 1, ErrorCode::kInvalidArgument, "num_bins must be >= 1");
  require(!confidences.empty(), ErrorCode::kEmptyInput, "ECE of an empty set");
  require(correct.size() == confidences.size(), ErrorCode::kDimensionMismatch,
          "confidences and correctness flags differ in length");
  std::vector<double> conf_sum(static_cast<std::size_t>(num_bins), 0.0);
  std::vector<double> hit_sum(static_cast<std::size_t>(num_bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(num_bins), 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const auto k = static_cast<std::size_t>(ece_bin(confidences[i], num_bins));
    conf_sum[k] += confidences[i];
    hit_sum[k] += correct[i] ? 1.0 : 0.0;
    ++count[k];
  }
  double total = 0.0;
  for (std::size_t k = 0; k < count.size(); ++k) {
    if (count[k] == 0) continue;
    total += std::abs(hit_sum[k] - conf_sum[k]);
  }
  return total / static_cast<double>(confidences.size());
}

double auroc(std::span<const double> scores_positive, std::span<const double> scores_negative) {
  require(!scores_positive.empty() && !scores_negative.empty(), ErrorCode::kEmptyInput,
          "AUROC needs both positive and negative scores");
  std::vector<double> neg(scores_negative.begin(), scores_negative.end());
  std::sort(neg.begin(), neg.end());
  // Twice U, kept integral so the two orientations sum to one exactly.
  std::uint64_t twice_u = 0;
  for (double s : scores_positive) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), s);
    const auto hi = std::upper_bound(lo, neg.end(), s);
    twice_u += 2 * static_cast<std::uint64_t>(lo - neg.begin()) +
               static_cast<std::uint64_t>(hi - lo);
  }
  const std::uint64_t total = 2 * scores_positive.size() * scores_negative.size();
  const auto d = static_cast<double>(total);
  if (2 * twice_u <= total) return static_cast<double>(twice_u) / d;
  return 1.0 - static_cast<double>(total - twice_u) / d;
}

MetricsReport evaluate(const DirichletMoments& moments, std::span<const int> truth,
                       int num_bins) {
  require(static_cast<Index>(truth.size()) == moments.size(), ErrorCode::kDimensionMismatch,
          "label count differs from the number of predictions");
  const std::vector<int> predicted = classify(moments);
  const VectorXd conf = confidences(moments).cwiseMin(1.0).cwiseMax(0.0);
  std::vector<bool> correct(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) correct[i] = predicted[i] == truth[i];
  MetricsReport report;
  report.accuracy = accuracy(predicted, truth);
  report.ece = ece(std::span<const double>(conf.data(), static_cast<std::size_t>(conf.size())),
                   correct, num_bins);
  report.num_bins = num_bins;
  report.n_eval = static_cast<Index>(truth.size());
  return report;
}

}  // namespace mvgp
