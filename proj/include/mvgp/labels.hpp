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

#ifndef MVGP_LABELS_HPP_
#define MVGP_LABELS_HPP_

#include <cmath>
#include <span>
#include <vector>

#include "mvgp/numerics.hpp"

namespace mvgp {

inline constexpr double kDefaultAlphaEps = 1e-3;

/// Log-normal parameters whose first two moments match Gamma(alpha, 1).
template <typename Scalar>
struct LogNormalMatch {
  Scalar mean;      // log-space target
  Scalar variance;  // log-space noise variance
};

template <typename Scalar>
LogNormalMatch<Scalar> match_gamma_moments(Scalar alpha) {
  using std::log;
  using std::log1p;
  const Scalar variance = log1p(Scalar(1) / alpha);
  return {log(alpha) - variance / Scalar(2), variance};
}

/// Per-class regression targets and heteroscedastic noise derived from
/// one-hot labels. Rows are samples, columns are classes.
template <typename Scalar = double>
struct TransformedLabels {
  DenseMatrix<Scalar> y_tilde;
  DenseMatrix<Scalar> sigma2_tilde;
  Scalar alpha_eps = Scalar(kDefaultAlphaEps);
  Index num_classes = 0;

  Index size() const { return y_tilde.rows(); }

  TransformedLabels rows(std::span<const Index> indices) const {
    TransformedLabels out;
    out.alpha_eps = alpha_eps;
    out.num_classes = num_classes;
    out.y_tilde = y_tilde(std::vector<Index>(indices.begin(), indices.end()),
                          Eigen::all);
    out.sigma2_tilde = sigma2_tilde(
        std::vector<Index>(indices.begin(), indices.end()), Eigen::all);
    return out;
  }
};

/// Dirichlet concentration -> log-normal regression labels.
///
/// alpha = 1 + alpha_eps for the true class and alpha_eps elsewhere; throws
/// LabelOutOfRange or InvalidAlphaEps.
TransformedLabels<double> transform_labels(std::span<const int> labels,
                                           int num_classes,
                                           double alpha_eps = kDefaultAlphaEps);

}  // namespace mvgp

#endif  // MVGP_LABELS_HPP_
