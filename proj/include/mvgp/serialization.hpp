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

#ifndef MVGP_SERIALIZATION_HPP_
#define MVGP_SERIALIZATION_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvgp/data.hpp"
#include "mvgp/metrics.hpp"
#include "mvgp/predictor.hpp"
#include "mvgp/svgp.hpp"
#include "mvgp/trainer.hpp"

namespace mvgp {

using Json = nlohmann::json;

// Matrices are stored row-major as nested arrays.
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

Json expert_to_json(const ExpertParams& expert);
ExpertParams expert_from_json(const Json& j);

Json stats_to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const Json& j);

Json train_report_to_json(const TrainReport& report);
Json metrics_to_json(const MetricsReport& report);

/// sample_id, predicted_class, e_pi_0..e_pi_{C-1}, uncertainty.
void write_predictions_csv(const std::filesystem::path& path, const DirichletMoments& moments);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Index of the files a command wrote under its output directory.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path out_dir);
  void add(const std::string& kind, const std::filesystem::path& file);
  void set(const std::string& key, Json value) { extra_[key] = std::move(value); }
  /// Writes <out_dir>/manifest.json.
  void write() const;

 private:
  std::filesystem::path out_dir_;
  Json entries_ = Json::array();
  Json extra_ = Json::object();
};

}  // namespace mvgp

#endif  // MVGP_SERIALIZATION_HPP_
