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

// End-to-end pipelines shared by the command-line tool and the tests.

#ifndef MVGP_EXPERIMENT_HPP_
#define MVGP_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvgp/data.hpp"
#include "mvgp/metrics.hpp"
#include "mvgp/poe.hpp"
#include "mvgp/predictor.hpp"
#include "mvgp/serialization.hpp"
#include "mvgp/trainer.hpp"

namespace mvgp {

struct ExperimentConfig {
  // Dataset directory; empty selects the synthetic moons generator.
  std::string data_dir;
  MoonsConfig synth;
  std::uint64_t synth_seed = 0;
  // Unlabeled OOD directory; for synthetic data the generator's OOD points
  // are used when empty.
  std::string ood_dir;
  // Unset: z-score loaded datasets, keep synthetic coordinates as generated.
  std::optional<bool> normalize;

  Index num_inducing = 200;
  double alpha_eps = kDefaultAlphaEps;
  CovarianceForm covariance = CovarianceForm::kFull;
  bool ard = true;
  Index mc_samples = kDefaultMcSamples;
  ViewWeightPolicy policy;
  TrainConfig train;
  NoiseSpec noise;
  // Negative: floor(V / 2).
  Index noisy_views = -1;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double train_fraction = 0.8;
  int ece_bins = kDefaultEceBins;
  // Not part of the hash.
  std::string out_dir;

  bool normalizes() const { return normalize.value_or(!data_dir.empty()); }
  void validate() const;
  /// Semantic fields only; keys are sorted, so field order never matters.
  Json to_json() const;
  static ExperimentConfig from_json(const Json& j);
  /// 16 hex digits of FNV-1a over the canonical JSON.
  std::string hash() const;
};

std::uint64_t fnv1a64(std::string_view bytes);

struct SourceData {
  MultiViewDataset dataset;
  std::vector<MatrixXd> ood_views;  // raw coordinates; may be empty
  Json provenance = Json::object();
};

SourceData load_source(const ExperimentConfig& cfg);

// Independent stream ids derived from one experiment seed.
enum class SeedStream : std::uint64_t {
  kTrain = 0,
  kSplit = 1,
  kPredict = 2,
  kNoise = 3,
  kSubsample = 4,
  kSynth = 5,
};

RngStream seed_stream(std::uint64_t seed, SeedStream stream);

struct PreparedSplit {
  TrainTestSplit split;
  NormalizedPair normalized;
};

/// With `normalize` false the stats are the identity.
PreparedSplit prepare_split(const MultiViewDataset& ds, double train_fraction,
                            std::uint64_t seed, bool normalize = true);

struct Model {
  std::vector<ExpertParams> experts;
  NormalizationStats stats;
  int num_classes = 0;
  double alpha_eps = kDefaultAlphaEps;
  TrainReport report;
  double train_seconds = 0.0;
};

/// Initializes one expert per view and trains them on normalized data.
Model fit_model(const MultiViewDataset& normalized_train, const NormalizationStats& stats,
                const ExperimentConfig& cfg, std::uint64_t seed);

/// Moments on already normalized views. `stream_salt` separates repeated
/// evaluations under one seed.
DirichletMoments predict_model(const Model& model, const std::vector<MatrixXd>& views,
                               const ExperimentConfig& cfg, std::uint64_t seed,
                               std::uint64_t stream_salt = 0);

Json checkpoint_to_json(const Model& model, const ExperimentConfig& cfg, std::uint64_t seed);
Model model_from_checkpoint(const Json& j);

struct SeedResult {
  std::uint64_t seed = 0;
  MetricsReport metrics;
  double mean_uncertainty_in = 0.0;
  std::optional<double> mean_uncertainty_ood;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
};

struct ResultRecord {
  std::string experiment_id;
  std::string config_hash;
  Json params = Json::object();
  std::vector<SeedResult> per_seed;

  /// Mean and sample standard deviation (0 for one seed) of a metric.
  std::pair<double, double> summary(const std::string& metric) const;
  Json to_json(bool include_timing = true) const;
};

/// Clean test accuracy and ECE per seed, plus AUROC when OOD views exist.
/// `n_in` / `n_ood` subsample the two sides without replacement.
ResultRecord run_standard(const ExperimentConfig& cfg, const SourceData& data,
                          std::optional<Index> n_in = std::nullopt,
                          std::optional<Index> n_ood = std::nullopt);

/// One record per (noise std, noisy subset); each seed trains once on clean
/// data and only the test views are corrupted.
std::vector<ResultRecord> run_noise_sweep(const ExperimentConfig& cfg, const SourceData& data);

/// Average over subsets per noise level and the overall mean accuracy.
Json noise_curve(const std::vector<ResultRecord>& records);

enum class SweepParam { kInducing, kAlphaEps, kMcSamples };
SweepParam parse_sweep_param(const std::string& name);

std::vector<ResultRecord> run_param_sweep(const ExperimentConfig& cfg, const SourceData& data,
                                          SweepParam param, const std::vector<double>& values);

/// Strips "timing" and "*_seconds" keys recursively.
Json without_timing(const Json& j);

}  // namespace mvgp

#endif  // MVGP_EXPERIMENT_HPP_
