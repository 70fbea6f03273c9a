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

// Product-of-experts fusion of per-view diagonal Gaussian marginals.

#ifndef MVGP_POE_HPP_
#define MVGP_POE_HPP_

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mvgp/svgp.hpp"

namespace mvgp {

enum class WeightMode { kUniform, kNegentropySoftmax };

struct ViewWeightPolicy {
  WeightMode mode = WeightMode::kUniform;
  double temperature = 1.0;

  void validate() const {
    require(temperature > 0.0 && std::isfinite(temperature), ErrorCode::kInvalidArgument,
            "temperature must be positive");
  }
};

template <typename Scalar = double>
struct AggregatedPrediction {
  DenseMatrix<Scalar> mean;     // B x C
  DenseMatrix<Scalar> var;      // B x C
  DenseMatrix<Scalar> weights;  // B x V
};

/// Row-wise entropy of a diagonal Gaussian: sum_c 0.5 log(2 pi e var_c).
template <typename Derived>
DenseVector<typename Derived::Scalar> entropy_gaussian(const Eigen::MatrixBase<Derived>& var) {
  using Scalar = typename Derived::Scalar;
  require((var.array() > Scalar(0)).all(), ErrorCode::kNonPositiveVariance,
          "entropy of a Gaussian needs positive variances");
  const Scalar c = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> *
                                          std::numbers::e_v<Scalar>);
  return (c + Scalar(0.5) * var.array().log()).rowwise().sum();
}

inline VectorXd entropy_gaussian(const GaussianBatchPrediction& pred) {
  return entropy_gaussian(pred.var);
}

namespace detail {

template <typename Scalar>
void check_conformant(const std::vector<DenseMatrix<Scalar>>& means,
                      const std::vector<DenseMatrix<Scalar>>& vars) {
  require(!means.empty() && means.size() == vars.size(), ErrorCode::kDimensionMismatch,
          "need the same, nonzero number of means and variances");
  for (std::size_t v = 0; v < means.size(); ++v) {
    require(means[v].rows() == means[0].rows() && means[v].cols() == means[0].cols() &&
                vars[v].rows() == means[0].rows() && vars[v].cols() == means[0].cols(),
            ErrorCode::kDimensionMismatch,
            "view " + std::to_string(v) + " prediction shape differs from view 0");
  }
}

}  // namespace detail

/// B x V weights. Uniform: all ones. Negentropy softmax: per row,
/// w = V * softmax(-H / temperature), so equal entropies give ones.
template <typename Scalar>
DenseMatrix<Scalar> compute_weights(const std::vector<DenseMatrix<Scalar>>& vars,
                                    const ViewWeightPolicy& policy) {
  policy.validate();
  require(!vars.empty(), ErrorCode::kDimensionMismatch, "no views to weight");
  const Index b = vars.front().rows();
  const auto v_count = static_cast<Index>(vars.size());
  if (policy.mode == WeightMode::kUniform) return DenseMatrix<Scalar>::Ones(b, v_count);

  DenseMatrix<Scalar> logits(b, v_count);
  for (Index v = 0; v < v_count; ++v) {
    const auto& var = vars[static_cast<std::size_t>(v)];
    require(var.rows() == b && var.cols() == vars.front().cols(), ErrorCode::kDimensionMismatch,
            "view " + std::to_string(v) + " prediction shape differs from view 0");
    logits.col(v) = -entropy_gaussian(var) / Scalar(policy.temperature);
  }
  const DenseVector<Scalar> row_max = logits.rowwise().maxCoeff();
  DenseMatrix<Scalar> w = (logits.colwise() - row_max).array().exp();
  const DenseVector<Scalar> total = w.rowwise().sum();
  for (Index i = 0; i < b; ++i) w.row(i) *= Scalar(v_count) / total[i];
  return w;
}

inline MatrixXd compute_weights(const std::vector<GaussianBatchPrediction>& preds,
                                const ViewWeightPolicy& policy) {
  std::vector<MatrixXd> vars;
  for (const auto& p : preds) vars.push_back(p.var);
  return compute_weights(vars, policy);
}

/// Per point and class: precision p = sum_v w_v / var_v, var = 1 / p,
/// mean = var * sum_v w_v mean_v / var_v.
template <typename Scalar>
AggregatedPrediction<Scalar> aggregate(const std::vector<DenseMatrix<Scalar>>& means,
                                       const std::vector<DenseMatrix<Scalar>>& vars,
                                       const DenseMatrix<Scalar>& weights) {
  detail::check_conformant(means, vars);
  const Index b = means.front().rows();
  const Index c = means.front().cols();
  require(weights.rows() == b && weights.cols() == static_cast<Index>(means.size()),
          ErrorCode::kDimensionMismatch,
          "weights must be " + std::to_string(b) + " x " + std::to_string(means.size()));
  require((weights.array() > Scalar(0)).all() && weights.allFinite(),
          ErrorCode::kNonPositiveWeight, "PoE weights must be positive and finite");

  DenseMatrix<Scalar> precision = DenseMatrix<Scalar>::Zero(b, c);
  DenseMatrix<Scalar> weighted_mean = DenseMatrix<Scalar>::Zero(b, c);
  for (std::size_t v = 0; v < means.size(); ++v) {
    require((vars[v].array() > Scalar(0)).all(), ErrorCode::kNonPositiveVariance,
            "view " + std::to_string(v) + " has a non-positive variance");
    const DenseMatrix<Scalar> p =
        vars[v].cwiseInverse().array().colwise() * weights.col(static_cast<Index>(v)).array();
    precision += p;
    weighted_mean += p.cwiseProduct(means[v]);
  }
  AggregatedPrediction<Scalar> out;
  out.var = precision.cwiseInverse();
  out.mean = out.var.cwiseProduct(weighted_mean);
  out.weights = weights;
  return out;
}

inline AggregatedPrediction<double> aggregate(const std::vector<GaussianBatchPrediction>& preds,
                                              const MatrixXd& weights) {
  std::vector<MatrixXd> means;
  std::vector<MatrixXd> vars;
  for (const auto& p : preds) {
    means.push_back(p.mean);
    vars.push_back(p.var);
  }
  return aggregate(means, vars, weights);
}

}  // namespace mvgp

#endif  // MVGP_POE_HPP_
