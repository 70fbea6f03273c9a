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

#include "mvgp/svgp.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace mvgp {

MatrixXd ExpertParams::covariance_factor(Index c) const {
  const MatrixXd& raw = L_S_raw.at(static_cast<std::size_t>(c));
  MatrixXd factor = MatrixXd::Zero(raw.rows(), raw.cols());
  if (covariance == CovarianceForm::kFull) {
    factor.triangularView<Eigen::StrictlyLower>() = raw;
  }
  factor.diagonal() = raw.diagonal().array().exp();
  return factor;
}

MatrixXd ExpertParams::covariance_matrix(Index c) const {
  const MatrixXd factor = covariance_factor(c);
  return factor * factor.transpose();
}

void ExpertParams::validate() const {
  const Index m_rows = Z.rows();
  require(m_rows >= 1, ErrorCode::kInvalidArgument, "expert needs at least one inducing point");
  require(kernel.input_dim() == Z.cols(), ErrorCode::kDimensionMismatch,
          "kernel has " + std::to_string(kernel.input_dim()) + " lengthscales but Z has " +
              std::to_string(Z.cols()) + " columns");
  require(m.rows() == m_rows, ErrorCode::kDimensionMismatch,
          "variational mean has " + std::to_string(m.rows()) + " rows, expected " +
              std::to_string(m_rows));
  require(static_cast<Index>(L_S_raw.size()) == m.cols(), ErrorCode::kDimensionMismatch,
          "expected one covariance factor per class");
  for (const auto& raw : L_S_raw) {
    require(raw.rows() == m_rows && raw.cols() == m_rows, ErrorCode::kDimensionMismatch,
            "covariance factor must be M x M");
    require(raw.allFinite(), ErrorCode::kInvalidArgument, "non-finite covariance factor");
  }
  require(Z.allFinite() && m.allFinite() && kernel.log_lengthscales.allFinite() &&
              std::isfinite(kernel.log_signal_variance),
          ErrorCode::kInvalidArgument, "non-finite expert parameters");
}

MatrixXd inducing_covariance(const ExpertParams& expert, const SvgpOptions& options) {
  MatrixXd k = cross_covariance(expert.kernel, expert.Z, expert.Z);
  k.diagonal().array() += options.inducing_jitter;
  return k;
}

ExpertParams init_expert(const MatrixXd& x_train, Index num_inducing, Index num_classes,
                         CovarianceForm covariance, bool ard, const SvgpOptions& options) {
  require(x_train.rows() >= 1, ErrorCode::kEmptyInput, "init_expert needs training rows");
  require(num_inducing >= 1, ErrorCode::kInvalidArgument, "num_inducing must be >= 1");
  require(num_classes >= 1, ErrorCode::kInvalidArgument, "num_classes must be >= 1");
  const Index m_rows = std::min(num_inducing, x_train.rows());

  ExpertParams expert;
  expert.kernel = KernelParams<double>::initial(x_train.cols(), ard);
  expert.Z = x_train.topRows(m_rows);
  expert.m = MatrixXd::Zero(m_rows, num_classes);
  expert.covariance = covariance;

  const MatrixXd k_mm = inducing_covariance(expert, options);
  MatrixXd raw;
  if (covariance == CovarianceForm::kFull) {
    const auto chol = cholesky_psd(k_mm, options.base_jitter);
    raw = chol.lower;
    raw.diagonal() = chol.lower.diagonal().array().log();
  } else {
    raw = MatrixXd::Zero(m_rows, m_rows);
    raw.diagonal() = 0.5 * k_mm.diagonal().array().log();
  }
  expert.L_S_raw.assign(static_cast<std::size_t>(num_classes), raw);
  return expert;
}

GaussianBatchPrediction q_f_marginals(const ExpertParams& expert, const MatrixXd& x_batch,
                                      const SvgpOptions& options) {
  expert.validate();
  require(x_batch.cols() == expert.input_dim(), ErrorCode::kDimensionMismatch,
          "batch has " + std::to_string(x_batch.cols()) + " features, expert expects " +
              std::to_string(expert.input_dim()));
  const auto chol = cholesky_psd(inducing_covariance(expert, options), options.base_jitter);
  const MatrixXd k_mb = cross_covariance(expert.kernel, expert.Z, x_batch);
  // W = L^{-1} K_MB and A = K_MM^{-1} K_MB, so A^T = K_BM K_MM^{-1}.
  const MatrixXd w = tri_solve(chol, k_mb);
  const MatrixXd a = tri_solve(chol, w, /*transposed=*/true);
  const VectorXd prior_var =
      expert.kernel.signal_variance() - w.colwise().squaredNorm().transpose().array();

  GaussianBatchPrediction out;
  out.mean = a.transpose() * expert.m;
  out.var.resize(x_batch.rows(), expert.num_classes());
  for (Index c = 0; c < expert.num_classes(); ++c) {
    const MatrixXd projected = expert.covariance_factor(c).transpose() * a;
    out.var.col(c) = (projected.colwise().squaredNorm().transpose() + prior_var)
                         .cwiseMax(options.variance_floor);
  }
  return out;
}

double kl_q_p(const ExpertParams& expert, const SvgpOptions& options) {
  expert.validate();
  const auto chol = cholesky_psd(inducing_covariance(expert, options), options.base_jitter);
  const double m_rows = static_cast<double>(expert.num_inducing());
  const double log_det_k = chol.log_determinant();
  double kl = 0.0;
  for (Index c = 0; c < expert.num_classes(); ++c) {
    const MatrixXd trace_term = tri_solve(chol, expert.covariance_factor(c));
    const VectorXd mahalanobis = tri_solve(chol, expert.m.col(c));
    const double log_det_s = 2.0 * expert.L_S_raw[static_cast<std::size_t>(c)].diagonal().sum();
    kl += 0.5 * (trace_term.squaredNorm() + mahalanobis.squaredNorm() - m_rows + log_det_k -
                 log_det_s);
  }
  return kl;
}

double expected_log_lik(const GaussianBatchPrediction& pred,
                        const TransformedLabels<double>& labels) {
  require(pred.mean.rows() == labels.y_tilde.rows() &&
              pred.mean.cols() == labels.y_tilde.cols() &&
              pred.var.rows() == pred.mean.rows() && pred.var.cols() == pred.mean.cols(),
          ErrorCode::kDimensionMismatch,
          "prediction is " + std::to_string(pred.mean.rows()) + "x" +
              std::to_string(pred.mean.cols()) + ", labels are " +
              std::to_string(labels.y_tilde.rows()) + "x" +
              std::to_string(labels.y_tilde.cols()));
  const auto s2 = labels.sigma2_tilde.array();
  const auto residual = labels.y_tilde.array() - pred.mean.array();
  return (-0.5 * (2.0 * std::numbers::pi * s2).log() -
          (residual.square() + pred.var.array()) / (2.0 * s2))
      .sum();
}

double elbo_view(const ExpertParams& expert, const MatrixXd& x_batch,
                 const TransformedLabels<double>& labels_batch, double scale, double beta,
                 const SvgpOptions& options) {
  require(scale >= 1.0, ErrorCode::kInvalidArgument, "likelihood scale must be >= 1");
  require(beta >= 0.0, ErrorCode::kInvalidArgument, "beta must be >= 0");
  const double ell = expected_log_lik(q_f_marginals(expert, x_batch, options), labels_batch);
  const double kl = beta == 0.0 ? 0.0 : kl_q_p(expert, options);
  return scale * ell - beta * kl;
}

}  // namespace mvgp
