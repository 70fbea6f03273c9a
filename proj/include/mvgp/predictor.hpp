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

#ifndef MVGP_PREDICTOR_HPP_
#define MVGP_PREDICTOR_HPP_

#include <vector>

#include "mvgp/poe.hpp"
#include "mvgp/svgp.hpp"

namespace mvgp {

inline constexpr Index kDefaultMcSamples = 100;

/// Monte-Carlo moments of the softmax of the fused latent Gaussian.
struct DirichletMoments {
  MatrixXd e_pi;         // B x C
  MatrixXd v_pi;         // B x C, 1/S normalization
  VectorXd uncertainty;  // row sums of v_pi
  Index mc_samples = 0;

  Index size() const { return e_pi.rows(); }
};

/// Per-view marginals, weights and their product for aligned test blocks.
/// Throws MismatchedBatch if the blocks disagree on B.
AggregatedPrediction<double> fuse_experts(const std::vector<ExpertParams>& experts,
                                          const std::vector<MatrixXd>& x_star,
                                          const ViewWeightPolicy& policy,
                                          const SvgpOptions& options = {});

/// S independent draws per point from the diagonal Gaussian, softmax per
/// draw. Point i uses rng.derive(i), so results do not depend on threading.
DirichletMoments softmax_moments(const MatrixXd& mean, const MatrixXd& var, Index mc_samples,
                                 const RngStream& rng);

DirichletMoments predict(const std::vector<ExpertParams>& experts,
                         const std::vector<MatrixXd>& x_star, const ViewWeightPolicy& policy,
                         Index mc_samples, const RngStream& rng,
                         const SvgpOptions& options = {});

/// Row-wise argmax of e_pi; ties go to the lowest class index.
std::vector<int> classify(const DirichletMoments& moments);

/// Row-wise max of e_pi.
VectorXd confidences(const DirichletMoments& moments);

}  // namespace mvgp

#endif  // MVGP_PREDICTOR_HPP_
