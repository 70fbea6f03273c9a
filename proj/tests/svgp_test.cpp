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

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "mvgp/trainer.hpp"
#include "test_util.hpp"

namespace mvgp {
namespace {

using testing::random_expert;
using testing::random_labels;
using testing::random_matrix;

SvgpOptions no_inducing_jitter() {
  SvgpOptions o;
  o.inducing_jitter = 0.0;
  return o;
}

GaussianBatchPrediction single(double mean, double var) {
  GaussianBatchPrediction p;
  p.mean = MatrixXd::Constant(1, 1, mean);
  p.var = MatrixXd::Constant(1, 1, var);
  return p;
}

TransformedLabels<double> single_label(double y, double s2) {
  TransformedLabels<double> t;
  t.y_tilde = MatrixXd::Constant(1, 1, y);
  t.sigma2_tilde = MatrixXd::Constant(1, 1, s2);
  t.num_classes = 1;
  return t;
}

TEST(SvgpExamples, PriorIsRecoveredAtInitialization) {
  std::mt19937_64 gen(1);
  const MatrixXd x = random_matrix(gen, 30, 2);
  ExpertParams e = init_expert(x, 8, 3);
  e.kernel.log_signal_variance = std::log(1.7);
  // Refactor S against the changed kernel so q(u) = p(u) again.
  for (auto& raw : e.L_S_raw) {
    raw = cholesky_psd(inducing_covariance(e)).lower;
    raw.diagonal() = raw.diagonal().array().log();
  }
  const auto q = q_f_marginals(e, x);
  EXPECT_LT(q.mean.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((q.var.array() - 1.7).abs().maxCoeff(), 1e-9);
  EXPECT_NEAR(kl_q_p(e), 0.0, 1e-9);
}

TEST(SvgpExamples, ScalarPosterior) {
  MatrixXd x(1, 1);
  x << 0.4;
  ExpertParams e = init_expert(x, 1, 1, CovarianceForm::kFull, true, no_inducing_jitter());
  e.m(0, 0) = 1.0;
  e.L_S_raw[0](0, 0) = 0.5 * std::log(0.01);
  const auto q = q_f_marginals(e, x, no_inducing_jitter());
  EXPECT_NEAR(q.mean(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(q.var(0, 0), 0.01, 1e-14);
}

TEST(SvgpExamples, FarFromInducingPointsRevertsToPrior) {
  std::mt19937_64 gen(2);
  const MatrixXd x = random_matrix(gen, 10, 2);
  const ExpertParams e = random_expert(gen, x, 5, 2);
  const MatrixXd far = MatrixXd::Constant(3, 2, 1e3);
  const auto q = q_f_marginals(e, far);
  EXPECT_LT(q.mean.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((q.var.array() - e.kernel.signal_variance()).abs().maxCoeff(), 1e-12);
}

TEST(SvgpExamples, KlOfMatchingDistributionsIsZero) {
  std::mt19937_64 gen(3);
  const ExpertParams e = init_expert(random_matrix(gen, 12, 3), 6, 2);
  EXPECT_NEAR(kl_q_p(e), 0.0, 1e-10);
}

TEST(SvgpExamples, KlByHand) {
  MatrixXd z(2, 2);
  z << 0, 0, 100, 100;
  ExpertParams e = init_expert(z, 2, 1, CovarianceForm::kFull, true, no_inducing_jitter());
  ASSERT_EQ(inducing_covariance(e, no_inducing_jitter()), MatrixXd::Identity(2, 2));
  e.L_S_raw[0].setZero();
  e.L_S_raw[0].diagonal().setConstant(0.5 * std::log(0.5));
  const double expected = 0.5 * (1.0 - 2.0 + 0.0 - std::log(0.25));
  EXPECT_NEAR(expected, 0.193147, 1e-6);
  EXPECT_NEAR(kl_q_p(e, no_inducing_jitter()), expected, 1e-14);
}

TEST(SvgpExamples, KlGrowsWithMeanScale) {
  std::mt19937_64 gen(4);
  const MatrixXd x = random_matrix(gen, 10, 2);
  ExpertParams e = random_expert(gen, x, 4, 2);
  const MatrixXd m0 = e.m;
  double previous = -1.0;
  for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    e.m = t * m0;
    const double kl = kl_q_p(e);
    EXPECT_GE(kl, previous);
    previous = kl;
  }
}

TEST(SvgpExamples, ExpectedLogLikAtPerfectFit) {
  const double s2 = 0.3;
  EXPECT_NEAR(expected_log_lik(single(1.2, 0.0), single_label(1.2, s2)),
              -0.5 * std::log(2 * std::numbers::pi * s2), 1e-15);
}

TEST(SvgpExamples, ExpectedLogLikStandardCase) {
  const double v = expected_log_lik(single(0.0, 1.0), single_label(0.0, 1.0));
  EXPECT_NEAR(v, -0.5 * std::log(2 * std::numbers::pi) - 0.5, 1e-15);
  EXPECT_NEAR(v, -1.418939, 1e-6);
}

TEST(SvgpExamples, ExpectedLogLikFallsWithVariance) {
  double previous = 0.0;
  for (double var : {0.1, 0.2, 0.5, 1.0, 3.0}) {
    const double v = expected_log_lik(single(0.3, var), single_label(-0.1, 0.7));
    if (var > 0.1) EXPECT_LT(v, previous);
    previous = v;
  }
}

TEST(SvgpExamples, ElboWithoutKlIsExpectedLogLik) {
  std::mt19937_64 gen(5);
  const MatrixXd x = random_matrix(gen, 9, 2);
  const auto labels = transform_labels(random_labels(gen, 9, 2), 2);
  const ExpertParams e = random_expert(gen, x, 4, 2);
  EXPECT_DOUBLE_EQ(elbo_view(e, x, labels, 1.0, 0.0), expected_log_lik(q_f_marginals(e, x), labels));
}

TEST(SvgpExamples, ElboAtPriorIsScaledExpectedLogLik) {
  std::mt19937_64 gen(6);
  const MatrixXd x = random_matrix(gen, 9, 2);
  const auto labels = transform_labels(random_labels(gen, 9, 2), 2);
  const ExpertParams e = init_expert(x, 4, 2);
  const double ell = expected_log_lik(q_f_marginals(e, x), labels);
  EXPECT_NEAR(elbo_view(e, x, labels, 3.0, 1.0), 3.0 * ell, 1e-9);
}

double exact_log_marginal(const ExpertParams& e, const MatrixXd& x,
                          const TransformedLabels<double>& labels) {
  const MatrixXd k = cross_covariance(e.kernel, x, x);
  double total = 0.0;
  for (Index c = 0; c < labels.num_classes; ++c) {
    total += testing::dense_gp(k, labels.y_tilde.col(c), labels.sigma2_tilde.col(c)).log_marginal;
  }
  return total;
}

TEST(SvgpExamples, ElboBoundsExactMarginalOnTinyCase) {
  std::mt19937_64 gen(7);
  const MatrixXd x = random_matrix(gen, 4, 2);
  const auto labels = transform_labels(random_labels(gen, 4, 2), 2);
  const ExpertParams e = random_expert(gen, x, 2, 2);
  EXPECT_LE(elbo_view(e, x, labels, 1.0, 1.0), exact_log_marginal(e, x, labels));
}

TEST(SvgpProperties, ElboIsALowerBound) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 3 + trial % 18;
    const MatrixXd x = random_matrix(gen, n, 2);
    const auto labels = transform_labels(random_labels(gen, n, 3), 3);
    const ExpertParams e = random_expert(gen, x, 1 + trial % 6, 3);
    const double exact = exact_log_marginal(e, x, labels);
    EXPECT_LE(elbo_view(e, x, labels, 1.0, 1.0), exact + 1e-9);
    EXPECT_LE(elbo_view(e, x, labels, 1.0, 1.0, no_inducing_jitter()), exact + 1e-9);
  }
}

TEST(SvgpProperties, CollapsedOptimumMatchesDenseGp) {
  std::mt19937_64 gen(9);
  const Index n = 10;
  const MatrixXd x = random_matrix(gen, n, 2, 2.0);
  const auto labels = transform_labels(random_labels(gen, n, 2), 2);
  ExpertParams e = init_expert(x, n, 2, CovarianceForm::kFull, true, no_inducing_jitter());
  const MatrixXd k = cross_covariance(e.kernel, x, x);
  for (Index c = 0; c < 2; ++c) {
    const Eigen::LLT<MatrixXd> llt(k + MatrixXd(labels.sigma2_tilde.col(c).asDiagonal()));
    e.m.col(c) = k * llt.solve(labels.y_tilde.col(c));
    const MatrixXd s = k - k * llt.solve(k);
    MatrixXd raw = Eigen::LLT<MatrixXd>(0.5 * (s + s.transpose())).matrixL();
    raw.diagonal() = raw.diagonal().array().log();
    e.L_S_raw[static_cast<std::size_t>(c)] = raw;
  }
  const auto q = q_f_marginals(e, x, no_inducing_jitter());
  for (Index c = 0; c < 2; ++c) {
    const auto exact = testing::dense_gp(k, labels.y_tilde.col(c), labels.sigma2_tilde.col(c));
    EXPECT_LT((q.mean.col(c) - exact.mean).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((q.var.col(c) - exact.var).cwiseAbs().maxCoeff(), 1e-8);
  }
  // The bound is tight there.
  EXPECT_NEAR(elbo_view(e, x, labels, 1.0, 1.0, no_inducing_jitter()),
              exact_log_marginal(e, x, labels), 1e-6);
}

TEST(SvgpProperties, VarianceFloorIsRespected) {
  MatrixXd x(1, 1);
  x << 0.0;
  ExpertParams e = init_expert(x, 1, 1, CovarianceForm::kFull, true, no_inducing_jitter());
  e.L_S_raw[0](0, 0) = -40.0;
  SvgpOptions o = no_inducing_jitter();
  o.variance_floor = 1e-6;
  EXPECT_DOUBLE_EQ(q_f_marginals(e, x, o).var(0, 0), 1e-6);
}

TEST(SvgpProperties, KlMatchesDenseOracle) {
  std::mt19937_64 gen(10);
  const MatrixXd x = random_matrix(gen, 12, 3);
  for (auto form : {CovarianceForm::kFull, CovarianceForm::kDiagonal}) {
    const ExpertParams e = random_expert(gen, x, 5, 3, form);
    const MatrixXd k = inducing_covariance(e);
    double expected = 0.0;
    for (Index c = 0; c < 3; ++c) {
      expected += gaussian_kl(e.m.col(c), e.covariance_matrix(c), VectorXd::Zero(5), k);
    }
    EXPECT_NEAR(kl_q_p(e), expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(SvgpProperties, DiagonalFormIgnoresOffDiagonalEntries) {
  std::mt19937_64 gen(11);
  const MatrixXd x = random_matrix(gen, 8, 2);
  ExpertParams e = random_expert(gen, x, 4, 2, CovarianceForm::kDiagonal);
  const auto before = q_f_marginals(e, x);
  e.L_S_raw[0](2, 1) = 5.0;
  e.L_S_raw[1](0, 3) = -5.0;
  const auto after = q_f_marginals(e, x);
  EXPECT_EQ(before.var, after.var);
}

TEST(SvgpProperties, InitUsesFirstRows) {
  std::mt19937_64 gen(12);
  const MatrixXd x = random_matrix(gen, 7, 2);
  EXPECT_EQ(init_expert(x, 3, 2).Z, x.topRows(3));
  EXPECT_EQ(init_expert(x, 50, 2).num_inducing(), 7);
}

TEST(SvgpProperties, ValidateCatchesShapeErrors) {
  std::mt19937_64 gen(13);
  ExpertParams e = init_expert(random_matrix(gen, 5, 2), 3, 2);
  e.m = MatrixXd::Zero(2, 2);
  EXPECT_THROW(e.validate(), Error);
  ExpertParams f = init_expert(random_matrix(gen, 5, 2), 3, 2);
  EXPECT_THROW(q_f_marginals(f, MatrixXd::Zero(2, 3)), Error);
}

}  // namespace
}  // namespace mvgp
