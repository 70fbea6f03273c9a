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

#include "mvgp/trainer.hpp"

#include <cstdlib>
#include <random>

#include "gtest/gtest.h"
#include "mvgp/data.hpp"
#include "mvgp/predictor.hpp"
#include "test_util.hpp"

namespace mvgp {
namespace {

using testing::max_gradient_error;
using testing::random_expert;
using testing::random_labels;
using testing::random_matrix;
using testing::tiny_problem;
using testing::TinyProblem;

TEST(TrainerExamples, GradientMatchesFiniteDifferencesOnTinyProblem) {
  const TinyProblem p = tiny_problem(7, 6, 3, 2, 2, 1);
  EXPECT_LT(max_gradient_error(p, 1.0, 1.0), 1e-4);
  EXPECT_LT(max_gradient_error(p, 3.0, 0.5), 1e-4);
}

TEST(TrainerExamples, ViewBlocksAreSeparable) {
  TinyProblem p = tiny_problem(11, 6, 3, 2, 2, 2);
  p.views[1].setZero();
  const LossGradient before = grad_loss(p.experts, p.views, p.labels, 1.0, 1.0);
  p.experts[0].m.array() += 0.5;
  p.experts[0].kernel.log_signal_variance += 0.2;
  const LossGradient after = grad_loss(p.experts, p.views, p.labels, 1.0, 1.0);
  EXPECT_EQ(pack_gradient(before.gradients[1]), pack_gradient(after.gradients[1]));
  EXPECT_NE(pack_gradient(before.gradients[0]), pack_gradient(after.gradients[0]));
}

TEST(TrainerExamples, CollapsedOptimumHasZeroVariationalGradient) {
  std::mt19937_64 gen(3);
  const Index n = 10;
  const MatrixXd x = random_matrix(gen, n, 2, 2.0);
  const auto y = random_labels(gen, n, 2);
  const auto labels = transform_labels(y, 2);
  ExpertParams e = init_expert(x, n, 2);
  const MatrixXd k = cross_covariance(e.kernel, x, x);
  ASSERT_EQ(cholesky_psd(k).jitter_used, 0.0);
  for (Index c = 0; c < 2; ++c) {
    const MatrixXd ky = k + MatrixXd(labels.sigma2_tilde.col(c).asDiagonal());
    const Eigen::LLT<MatrixXd> llt(ky);
    e.m.col(c) = k * llt.solve(labels.y_tilde.col(c));
    const MatrixXd s = k - k * llt.solve(k);
    MatrixXd raw = Eigen::LLT<MatrixXd>(0.5 * (s + s.transpose())).matrixL();
    raw.diagonal() = raw.diagonal().array().log();
    e.L_S_raw[static_cast<std::size_t>(c)] = raw;
  }
  SvgpOptions exact;
  exact.inducing_jitter = 0.0;
  const LossGradient lg = expert_loss_gradient(e, x, labels, 1.0, 1.0, exact, false, false);
  const ExpertGradient& g = lg.gradients.front();
  double norm2 = g.d_m.squaredNorm();
  for (const auto& d : g.d_L_S_raw) norm2 += d.squaredNorm();
  EXPECT_LT(std::sqrt(norm2), 1e-6);
}

TEST(TrainerExamples, ZeroEpochsLeavesParametersUnchanged) {
  TinyProblem p = tiny_problem(5, 8, 3, 2, 2, 2);
  MultiViewDataset ds;
  ds.views = p.views;
  ds.num_classes = 2;
  ds.labels.assign(8, 0);
  const auto before = p.experts;
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainReport report = train(ds, p.labels, p.experts, cfg);
  EXPECT_TRUE(report.epoch_loss.empty());
  for (std::size_t v = 0; v < before.size(); ++v) {
    EXPECT_EQ(pack_parameters(before[v]), pack_parameters(p.experts[v]));
  }
}

MultiViewDataset separable_toy(std::uint64_t seed, Index n) {
  std::mt19937_64 gen(seed);
  MultiViewDataset ds;
  ds.num_classes = 2;
  MatrixXd a = random_matrix(gen, n, 2);
  MatrixXd b = random_matrix(gen, n, 3);
  for (Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    ds.labels.push_back(label);
    const double shift = label == 0 ? -1.5 : 1.5;
    a(i, 0) = shift + 0.3 * a(i, 0);
    b(i, 1) = shift + 0.3 * b(i, 1);
  }
  ds.views = {a, b};
  return ds;
}

TEST(TrainerExamples, SeparableToyIsFitExactly) {
  const MultiViewDataset ds = separable_toy(2, 400);
  const auto labels = transform_labels(ds.labels, 2);
  std::vector<ExpertParams> experts;
  for (const auto& v : ds.views) experts.push_back(init_expert(v, 20, 2));
  TrainConfig cfg;
  cfg.batch_size = 16;
  ASSERT_EQ(cfg.epochs, 30);
  train(ds, labels, experts, cfg);
  const auto moments = predict(experts, ds.views, {}, 100, RngStream(1));
  EXPECT_EQ(classify(moments), ds.labels);
}

TEST(TrainerExamples, IdenticalSeedsGiveIdenticalLossSequences) {
  const MultiViewDataset ds = separable_toy(4, 40);
  const auto labels = transform_labels(ds.labels, 2);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 99;
  auto run = [&] {
    std::vector<ExpertParams> experts;
    for (const auto& v : ds.views) experts.push_back(init_expert(v, 10, 2));
    return train(ds, labels, experts, cfg).epoch_loss;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainerExamples, NonFiniteLossNamesTheEpoch) {
  MultiViewDataset ds = separable_toy(4, 20);
  const auto labels = transform_labels(ds.labels, 2);
  std::vector<ExpertParams> experts;
  for (const auto& v : ds.views) experts.push_back(init_expert(v, 5, 2));
  ds.views[0](3, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 2;
  try {
    train(ds, labels, experts, cfg);
    FAIL() << "expected NonFiniteLoss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos);
  }
}

TEST(TrainerProperties, ScaledMinibatchLikelihoodIsUnbiased) {
  std::mt19937_64 gen(21);
  const Index n = 40;
  const Index b = 8;
  const MatrixXd x = random_matrix(gen, n, 2);
  const auto labels = transform_labels(random_labels(gen, n, 3), 3);
  const ExpertParams e = random_expert(gen, x, 5, 3);
  const double full = expected_log_lik(q_f_marginals(e, x), labels);
  RngStream rng(5);
  double acc = 0.0;
  const int trials = 10000;
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (int t = 0; t < trials; ++t) {
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < b; ++i) {
      const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    const std::vector<Index> rows(idx.begin(), idx.begin() + b);
    const auto sub = labels.rows(rows);
    acc += static_cast<double>(n) / b * expected_log_lik(q_f_marginals(e, x(rows, Eigen::all)), sub);
  }
  EXPECT_NEAR(acc / trials / full, 1.0, 0.02);
}

TEST(TrainerProperties, ResultIndependentOfThreadCount) {
  const MultiViewDataset ds = separable_toy(8, 40);
  const auto labels = transform_labels(ds.labels, 2);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 10;
  auto run = [&](const char* threads) {
    setenv("MVGP_THREADS", threads, 1);
    std::vector<ExpertParams> experts;
    for (const auto& v : ds.views) experts.push_back(init_expert(v, 8, 2));
    train(ds, labels, experts, cfg);
    VectorXd all(0);
    for (const auto& e : experts) {
      const VectorXd p = pack_parameters(e);
      all.conservativeResize(all.size() + p.size());
      all.tail(p.size()) = p;
    }
    return all;
  };
  const VectorXd serial = run("1");
  const VectorXd threaded = run("4");
  unsetenv("MVGP_THREADS");
  EXPECT_EQ(serial, threaded);
}

TEST(TrainerProperties, DiagonalFormGradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(17);
  TinyProblem p;
  p.labels = transform_labels(random_labels(gen, 7, 3), 3);
  p.views.push_back(random_matrix(gen, 7, 3));
  p.experts.push_back(random_expert(gen, p.views[0], 4, 3, CovarianceForm::kDiagonal));
  EXPECT_LT(max_gradient_error(p, 2.0, 1.0), 1e-4);
}

TEST(TrainerProperties, TiedLengthscalesStayTied) {
  const MultiViewDataset ds = separable_toy(9, 30);
  const auto labels = transform_labels(ds.labels, 2);
  std::vector<ExpertParams> experts;
  for (const auto& v : ds.views) experts.push_back(init_expert(v, 6, 2, CovarianceForm::kFull, false));
  TrainConfig cfg;
  cfg.epochs = 2;
  train(ds, labels, experts, cfg);
  for (const auto& e : experts) {
    EXPECT_EQ(e.kernel.log_lengthscales.minCoeff(), e.kernel.log_lengthscales.maxCoeff());
    EXPECT_NE(e.kernel.log_lengthscales[0], 0.0);
  }
}

TEST(TrainerProperties, LearningRateScheduleInterpolatesThenHolds) {
  LearningRateSchedule s;
  EXPECT_DOUBLE_EQ(s.rate(0, 0, 10), 0.01);
  EXPECT_NEAR(s.rate(5, 0, 10), 0.0065, 1e-15);
  EXPECT_DOUBLE_EQ(s.rate(10, 0, 10), 0.003);
  EXPECT_DOUBLE_EQ(s.rate(29, 9, 10), 0.003);
}

}  // namespace
}  // namespace mvgp
