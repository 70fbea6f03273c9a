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

#ifndef MVGP_DATA_HPP_
#define MVGP_DATA_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvgp/numerics.hpp"

namespace mvgp {

/// V aligned feature matrices (N x D_v each) sharing one label vector.
struct MultiViewDataset {
  std::string name;
  std::vector<MatrixXd> views;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> view_names;

  Index size() const { return views.empty() ? 0 : views.front().rows(); }
  Index num_views() const { return static_cast<Index>(views.size()); }
  std::vector<Index> view_dims() const;

  /// Throws on ragged views or out-of-range labels.
  void validate() const;

  /// Rows `indices` of every view and of the labels.
  MultiViewDataset subset(std::span<const Index> indices) const;
};

/// Per-view, per-feature z-score parameters fitted on a training set.
struct NormalizationStats {
  static constexpr double kStdFloor = 1e-8;

  std::vector<VectorXd> mean;
  std::vector<VectorXd> stddev;

  static NormalizationStats fit(const MultiViewDataset& train);
  /// Zero mean, unit scale: `apply` returns its input.
  static NormalizationStats identity(const MultiViewDataset& like);
  MultiViewDataset apply(const MultiViewDataset& ds) const;
  bool empty() const { return mean.empty(); }
};

enum class NoiseOrder { kNormalizeFirst, kNoiseFirst };

struct NoiseSpec {
  std::vector<double> std_grid{0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0};
  NoiseOrder mode = NoiseOrder::kNormalizeFirst;
  Index noisy_view_count = 0;

  /// Default grid with floor(V / 2) noisy views.
  static NoiseSpec for_views(Index num_views);
  void validate() const;
};

/// Two interleaving half circles, one 2-D view per radius.
///
/// Every view shares the same angles and the same additive noise draws; view
/// v is radius_v * base + noise. The view at `overlap_view` (if present)
/// additionally shifts class 1 by `radius * overlap_shift` so the classes
/// overlap. OOD points sit at radius_v * ood_center plus isotropic noise of
/// standard deviation `ood_std`, reusing the same draws in each view.
struct MoonsConfig {
  Index n_per_class = 1000;
  std::vector<double> radii{1.7, 1.0, 0.3};
  double noise = 0.1;
  Index ood_count = 200;
  double ood_std = 0.04;
  Index overlap_view = 2;
  bool translate_overlap_view = true;
  Eigen::Vector2d ood_center{0.5, 0.25};
};

struct MoonsData {
  MultiViewDataset dataset;
  std::vector<MatrixXd> ood_views;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
};

/// Shift that moves the class-1 half circle onto the class-0 one (centroid
/// to centroid), in unit-radius coordinates.
Eigen::Vector2d moons_overlap_shift();

MoonsData make_moons_multiview(const MoonsConfig& config, RngStream& rng);

struct TrainTestSplit {
  MultiViewDataset train;
  MultiViewDataset test;
  std::vector<Index> train_indices;
  std::vector<Index> test_indices;
};

/// Shuffled split; the train part holds round(fraction * N) rows, clamped so
/// both parts are non-empty when N >= 2.
TrainTestSplit split(const MultiViewDataset& ds, double train_fraction, RngStream& rng);

struct NormalizedPair {
  MultiViewDataset train;
  MultiViewDataset test;
  NormalizationStats stats;
};

/// z-scores both sets with statistics of `train` only.
NormalizedPair normalize(const MultiViewDataset& train, const MultiViewDataset& test);

/// Adds i.i.d. N(0, std^2) to the listed views; other views are copied as is.
MultiViewDataset inject_noise(const MultiViewDataset& ds, std::span<const Index> view_subset,
                              double std, RngStream& rng);

/// All k-subsets of {0, ..., V-1} in lexicographic order.
std::vector<std::vector<Index>> noise_view_combinations(Index num_views, Index k);

// Directory format: meta.json, view_<v>.csv (N rows, no header) and
// labels.csv (N integers). Unlabeled sets (OOD) omit labels.csv and carry
// "labeled": false in meta.json.
MultiViewDataset load_dataset(const std::filesystem::path& dir);
std::vector<MatrixXd> load_unlabeled_views(const std::filesystem::path& dir);
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir,
                  const nlohmann::json& extra_meta = nlohmann::json::object());
void save_unlabeled_views(const std::vector<MatrixXd>& views, const std::string& name,
                          const std::filesystem::path& dir,
                          const nlohmann::json& extra_meta = nlohmann::json::object());

/// Decimal rendering with 17 significant digits; parses back bit-exactly.
std::string format_double(double value);

}  // namespace mvgp

#endif  // MVGP_DATA_HPP_
