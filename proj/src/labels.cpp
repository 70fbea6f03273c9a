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

#include "mvgp/labels.hpp"

#include <string>

namespace mvgp {

TransformedLabels<double> transform_labels(std::span<const int> labels,
                                           int num_classes, double alpha_eps) {
  require(num_classes >= 2, ErrorCode::kInvalidArgument,
          "need at least two classes, got " + std::to_string(num_classes));
  require(alpha_eps > 0.0 && std::isfinite(alpha_eps), ErrorCode::kInvalidAlphaEps,
          "alpha_eps must be positive, got " + std::to_string(alpha_eps));

  const auto hot = match_gamma_moments(1.0 + alpha_eps);
  const auto cold = match_gamma_moments(alpha_eps);

  const auto n = static_cast<Index>(labels.size());
  TransformedLabels<double> out;
  out.alpha_eps = alpha_eps;
  out.num_classes = num_classes;
  out.y_tilde.setConstant(n, num_classes, cold.mean);
  out.sigma2_tilde.setConstant(n, num_classes, cold.variance);
  for (Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < num_classes, ErrorCode::kLabelOutOfRange,
            "label " + std::to_string(y) + " at index " + std::to_string(i) +
                " outside [0, " + std::to_string(num_classes) + ")");
    out.y_tilde(i, y) = hot.mean;
    out.sigma2_tilde(i, y) = hot.variance;
  }
  return out;
}

}  // namespace mvgp
