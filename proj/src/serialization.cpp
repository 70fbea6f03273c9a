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

#include "mvgp/serialization.hpp"

#include <fstream>

namespace mvgp {
namespace fs = std::filesystem;

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  require(static_cast<Index>(data.size()) == rows, ErrorCode::kRaggedRows,
          "matrix has " + std::to_string(data.size()) + " rows, expected " + std::to_string(rows));
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = data[static_cast<std::size_t>(i)];
    require(static_cast<Index>(row.size()) == cols, ErrorCode::kRaggedRows,
            "matrix row " + std::to_string(i) + " has the wrong length");
    for (Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json vector_to_json(const VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

Json expert_to_json(const ExpertParams& expert) {
  Json factors = Json::array();
  for (const auto& raw : expert.L_S_raw) factors.push_back(matrix_to_json(raw));
  return Json{
      {"M", expert.num_inducing()},
      {"D", expert.input_dim()},
      {"C", expert.num_classes()},
      {"log_signal_variance", expert.kernel.log_signal_variance},
      {"log_lengthscales", vector_to_json(expert.kernel.log_lengthscales)},
      {"ard", expert.kernel.ard},
      {"Z", matrix_to_json(expert.Z)},
      {"m", matrix_to_json(expert.m)},
      {"L_S_raw", std::move(factors)},
      {"covariance", expert.covariance == CovarianceForm::kFull ? "full" : "diagonal"},
  };
}

ExpertParams expert_from_json(const Json& j) {
  try {
    ExpertParams e;
    e.kernel.log_signal_variance = j.at("log_signal_variance").get<double>();
    e.kernel.log_lengthscales = vector_from_json(j.at("log_lengthscales"));
    e.kernel.ard = j.at("ard").get<bool>();
    e.Z = matrix_from_json(j.at("Z"));
    e.m = matrix_from_json(j.at("m"));
    for (const auto& f : j.at("L_S_raw")) e.L_S_raw.push_back(matrix_from_json(f));
    const auto form = j.at("covariance").get<std::string>();
    require(form == "full" || form == "diagonal", ErrorCode::kInvalidArgument,
            "unknown covariance form '" + form + "'");
    e.covariance = form == "full" ? CovarianceForm::kFull : CovarianceForm::kDiagonal;
    e.validate();
    require(j.at("M").get<Index>() == e.num_inducing() && j.at("D").get<Index>() == e.input_dim() &&
                j.at("C").get<Index>() == e.num_classes(),
            ErrorCode::kDimensionMismatch, "expert M, D, C disagree with its matrices");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed expert: ") + ex.what());
  }
}

Json stats_to_json(const NormalizationStats& stats) {
  Json mean = Json::array();
  Json sd = Json::array();
  for (const auto& v : stats.mean) mean.push_back(vector_to_json(v));
  for (const auto& v : stats.stddev) sd.push_back(vector_to_json(v));
  return Json{{"mean", std::move(mean)}, {"stddev", std::move(sd)}};
}

NormalizationStats stats_from_json(const Json& j) {
  NormalizationStats stats;
  for (const auto& v : j.at("mean")) stats.mean.push_back(vector_from_json(v));
  for (const auto& v : j.at("stddev")) stats.stddev.push_back(vector_from_json(v));
  require(stats.mean.size() == stats.stddev.size(), ErrorCode::kInvalidArgument,
          "normalization mean and stddev differ in view count");
  return stats;
}

Json train_report_to_json(const TrainReport& report) {
  return Json{{"epochs", report.epoch_loss.size()},
              {"epoch_loss", report.epoch_loss},
              {"epoch_seconds", report.epoch_seconds}};
}

Json metrics_to_json(const MetricsReport& report) {
  Json j{{"accuracy", report.accuracy},
         {"ece", report.ece},
         {"num_bins", report.num_bins},
         {"n_eval", report.n_eval}};
  if (report.auroc) j["auroc"] = *report.auroc;
  return j;
}

void write_predictions_csv(const fs::path& path, const DirichletMoments& moments) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kMissingFile, "cannot write " + path.string());
  out << "sample_id,predicted_class";
  for (Index c = 0; c < moments.e_pi.cols(); ++c) out << ",e_pi_" << c;
  out << ",uncertainty\n";
  const std::vector<int> predicted = classify(moments);
  for (Index i = 0; i < moments.size(); ++i) {
    out << i << ',' << predicted[static_cast<std::size_t>(i)];
    for (Index c = 0; c < moments.e_pi.cols(); ++c) out << ',' << format_double(moments.e_pi(i, c));
    out << ',' << format_double(moments.uncertainty[i]) << '\n';
  }
}

Json read_json(const fs::path& path) {
  require(fs::exists(path), ErrorCode::kMissingFile, path.string() + " does not exist");
  std::ifstream in(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  require(out.good(), ErrorCode::kMissingFile, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Manifest::Manifest(fs::path out_dir) : out_dir_(std::move(out_dir)) {}

void Manifest::add(const std::string& kind, const fs::path& file) {
  entries_.push_back(Json{{"kind", kind}, {"path", file.lexically_relative(out_dir_).generic_string()}});
}

void Manifest::write() const {
  Json j = extra_;
  j["files"] = entries_;
  write_json(out_dir_ / "manifest.json", j);
}

}  // namespace mvgp
