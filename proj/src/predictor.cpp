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

#include "mvgp/predictor.hpp"

#include <string>

#include "mvgp/parallel.hpp"

namespace mvgp {

AggregatedPrediction<double> fuse_experts(const std::vector<ExpertParams>& experts,
                                          const std::vector<MatrixXd>& x_star,
                                          const ViewWeightPolicy& policy,
                                          const SvgpOptions& options) {
  require(!experts.empty() && experts.size() == x_star.size(), ErrorCode::kDimensionMismatch,
          std::to_string(experts.size()) + " experts but " + std::to_string(x_star.size()) +
              " view blocks");
  for (const auto& x : x_star) {
    require(x.rows() == x_star.front().rows(), ErrorCode::kMismatchedBatch,
            "view blocks disagree on the number of test points");
  }
  std::vector<GaussianBatchPrediction> preds(experts.size());
  parallel_for(static_cast<Index>(experts.size()), [&](Index v) {
    const auto i = static_cast<std::size_t>(v);
    preds[i] = q_f_marginals(experts[i], x_star[i], options);
  });
  return aggregate(preds, compute_weights(preds, policy));
}

DirichletMoments softmax_moments(const MatrixXd& mean, const MatrixXd& var, Index mc_samples,
                                 const RngStream& rng) {
  require(mc_samples >= 1, ErrorCode::kInvalidArgument, "need at least one MC sample");
  require(mean.rows() == var.rows() && mean.cols() == var.cols(), ErrorCode::kDimensionMismatch,
          "mean and variance shapes differ");
  require((var.array() >= 0.0).all(), ErrorCode::kNonPositiveVariance,
          "negative predictive variance");
  const Index b = mean.rows();
  const Index c = mean.cols();
  DirichletMoments out;
  out.mc_samples = mc_samples;
  out.e_pi.resize(b, c);
  out.v_pi.resize(b, c);

  constexpr Index kChunk = 64;
  const Index chunks = (b + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](Index chunk) {
    MatrixXd probs(mc_samples, c);
    Eigen::RowVectorXd f(c);
    for (Index i = chunk * kChunk; i < std::min(b, (chunk + 1) * kChunk); ++i) {
      RngStream point = rng.derive(static_cast<std::uint64_t>(i));
      const Eigen::RowVectorXd sd = var.row(i).cwiseSqrt();
      for (Index s = 0; s < mc_samples; ++s) {
        for (Index k = 0; k < c; ++k) f[k] = mean(i, k) + sd[k] * point.normal();
        const Eigen::RowVectorXd e = (f.array() - f.maxCoeff()).exp();
        probs.row(s) = e / e.sum();
      }
      const Eigen::RowVectorXd mu = probs.colwise().mean();
      out.e_pi.row(i) = mu;
      out.v_pi.row(i) = (probs.rowwise() - mu).colwise().squaredNorm() /
                        static_cast<double>(mc_samples);
    }
  });
  out.uncertainty = out.v_pi.rowwise().sum();
  return out;
}

DirichletMoments predict(const std::vector<ExpertParams>& experts,
                         const std::vector<MatrixXd>& x_star, const ViewWeightPolicy& policy,
                         Index mc_samples, const RngStream& rng, const SvgpOptions& options) {
  require(mc_samples >= 1, ErrorCode::kInvalidArgument, "need at least one MC sample");
  const auto fused = fuse_experts(experts, x_star, policy, options);
  return softmax_moments(fused.mean, fused.var, mc_samples, rng);
}

std::vector<int> classify(const DirichletMoments& moments) {
  std::vector<int> labels(static_cast<std::size_t>(moments.e_pi.rows()));
  for (Index i = 0; i < moments.e_pi.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < moments.e_pi.cols(); ++k) {
      if (moments.e_pi(i, k) > moments.e_pi(i, best)) best = k;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

VectorXd confidences(const DirichletMoments& moments) {
  return moments.e_pi.rowwise().maxCoeff();
}

}  // namespace mvgp
