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

#ifndef MVGP_SVGP_HPP_
#define MVGP_SVGP_HPP_

#include <vector>

#include "mvgp/kernel.hpp"
#include "mvgp/labels.hpp"
#include "mvgp/numerics.hpp"

namespace mvgp {

inline constexpr double kDefaultVarianceFloor = 1e-8;
inline constexpr double kDefaultInducingJitter = 1e-2;

/// Structure of the per-class variational covariance S = L L^T.
enum class CovarianceForm { kFull, kDiagonal };

struct SvgpOptions {
  // Always added to the K_MM diagonal, before any escalation in cholesky_psd.
  double inducing_jitter = kDefaultInducingJitter;
  double base_jitter = kDefaultBaseJitter;
  double variance_floor = kDefaultVarianceFloor;
};

/// One view's sparse variational GP.
///
/// `L_S_raw[c]` is an M x M matrix whose strict lower triangle is the
/// Cholesky factor of S_c and whose diagonal holds the log of the factor's
/// diagonal. The upper triangle is ignored. Kernel and inducing inputs are
/// shared by the C per-class GPs.
struct ExpertParams {
  KernelParams<double> kernel;
  MatrixXd Z;
  MatrixXd m;
  std::vector<MatrixXd> L_S_raw;
  CovarianceForm covariance = CovarianceForm::kFull;

  Index num_inducing() const { return Z.rows(); }
  Index input_dim() const { return Z.cols(); }
  Index num_classes() const { return m.cols(); }

  /// Lower-triangular factor of S_c with the log-diagonal expanded.
  MatrixXd covariance_factor(Index c) const;
  MatrixXd covariance_matrix(Index c) const;

  /// Throws DimensionMismatch / InvalidArgument if the parts disagree.
  void validate() const;
};

/// K_MM plus the constant inducing jitter.
MatrixXd inducing_covariance(const ExpertParams& expert, const SvgpOptions& options = {});

/// Starts at q(u) = p(u): m = 0 and L_S = chol(K_MM), with Z set to the
/// first `num_inducing` rows of `x_train` (fewer if the set is smaller).
ExpertParams init_expert(const MatrixXd& x_train, Index num_inducing, Index num_classes,
                         CovarianceForm covariance = CovarianceForm::kFull,
                         bool ard = true, const SvgpOptions& options = {});

/// Marginals of q(f) at a batch: row i, column c.
struct GaussianBatchPrediction {
  MatrixXd mean;
  MatrixXd var;

  Index size() const { return mean.rows(); }
  Index num_classes() const { return mean.cols(); }
};

GaussianBatchPrediction q_f_marginals(const ExpertParams& expert, const MatrixXd& x_batch,
                                      const SvgpOptions& options = {});

/// Sum over classes of KL[q(u_c) || p(u)].
double kl_q_p(const ExpertParams& expert, const SvgpOptions& options = {});

/// Closed-form Gaussian expectation of the log-space likelihood, summed over
/// the batch and the classes.
double expected_log_lik(const GaussianBatchPrediction& pred,
                        const TransformedLabels<double>& labels);

double elbo_view(const ExpertParams& expert, const MatrixXd& x_batch,
                 const TransformedLabels<double>& labels_batch, double scale, double beta,
                 const SvgpOptions& options = {});

}  // namespace mvgp

#endif  // MVGP_SVGP_HPP_
