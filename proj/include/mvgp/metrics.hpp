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

#ifndef MVGP_METRICS_HPP_
#define MVGP_METRICS_HPP_

#include <optional>
#include <span>
#include <vector>

#include "mvgp/predictor.hpp"

namespace mvgp {

inline constexpr int kDefaultEceBins = 15;

struct MetricsReport {
  double accuracy = 0.0;
  double ece = 0.0;
  int num_bins = kDefaultEceBins;
  std::optional<double> auroc;
  Index n_eval = 0;
};

double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Bin index in [0, K) for the right-closed bins ((k-1)/K, k/K]; a
/// confidence of 0 goes to the first bin.
int ece_bin(double confidence, int num_bins);

double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           int num_bins = kDefaultEceBins);

/// Mann-Whitney U / (n_pos n_neg) with ties counted one half.
double auroc(std::span<const double> scores_positive, std::span<const double> scores_negative);

/// Accuracy and ECE of predicted moments against labels.
MetricsReport evaluate(const DirichletMoments& moments, std::span<const int> truth,
                       int num_bins = kDefaultEceBins);

}  // namespace mvgp

#endif  // MVGP_METRICS_HPP_
