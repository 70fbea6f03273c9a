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

#include "mvgp/kernel.hpp"

#include <cmath>
#include <random>

#include "Eigen/Eigenvalues"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace mvgp {
namespace {

TEST(KernelExamples, ZeroDistanceGivesSignalVariance) {
  auto p = KernelParams<double>::initial(3);
  p.log_signal_variance = std::log(2.5);
  const Eigen::Vector3d x(0.3, -1.0, 2.0);
  EXPECT_DOUBLE_EQ(rbf(p, x, x), 2.5);
}

TEST(KernelExamples, UnitParameters) {
  const auto p = KernelParams<double>::initial(2);
  EXPECT_NEAR(rbf(p, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(std::exp(-1.0), 0.367879, 1e-6);
}

TEST(KernelExamples, LongLengthscaleApproachesSignalVariance) {
  auto p = KernelParams<double>::initial(2);
  const Eigen::Vector2d x(0, 0), y(3, -2);
  double previous = 0.0;
  for (double l : {1.0, 10.0, 100.0, 1e4}) {
    p.log_lengthscales.setConstant(std::log(l));
    const double k = rbf(p, x, y);
    EXPECT_GT(k, previous);
    previous = k;
  }
  EXPECT_NEAR(previous, 1.0, 1e-7);
}

TEST(KernelExamples, SelfGramIsSymmetric) {
  std::mt19937_64 gen(4);
  const MatrixXd x = testing::random_matrix(gen, 6, 3);
  const auto g = gram(KernelParams<double>::initial(3), x, x);
  EXPECT_EQ(g.K_NM, g.K_MM);
  EXPECT_EQ(g.K_MM, g.K_MM.transpose());
}

TEST(KernelExamples, SinglePointGram) {
  auto p = KernelParams<double>::initial(2);
  p.log_signal_variance = 0.4;
  MatrixXd x(1, 2), z(1, 2);
  x << 0.5, 1.0;
  z << -0.5, 2.0;
  const auto g = gram(p, x, z);
  EXPECT_DOUBLE_EQ(g.K_NM(0, 0), rbf(p, x.row(0), z.row(0)));
  EXPECT_DOUBLE_EQ(g.K_MM(0, 0), std::exp(0.4));
  EXPECT_DOUBLE_EQ(g.K_NN_diag[0], std::exp(0.4));
}

TEST(KernelExamples, GramIsPositiveSemidefinite) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd z = testing::random_matrix(gen, 5, 3);
    const auto k = cross_covariance(KernelParams<double>::initial(3), z, z);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(KernelProperties, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = KernelParams<double>::initial(3);
    p.log_signal_variance = u(gen);
    for (Index d = 0; d < 3; ++d) p.log_lengthscales[d] = u(gen);
    const Eigen::Vector3d x = testing::random_matrix(gen, 3, 1);
    const Eigen::Vector3d y = testing::random_matrix(gen, 3, 1);
    const auto g = rbf_gradient(p, x, y);
    VectorXd theta(4);
    theta << p.log_signal_variance, p.log_lengthscales;
    const VectorXd fd = testing::central_difference(
        [&](const VectorXd& t) {
          KernelParams<double> q = p;
          q.log_signal_variance = t[0];
          q.log_lengthscales = t.tail(3);
          return rbf(q, x, y);
        },
        theta, 1e-5);
    EXPECT_LT(testing::relative_error(g.d_log_signal_variance, fd[0]), 1e-5);
    for (Index d = 0; d < 3; ++d) {
      EXPECT_LT(testing::relative_error(g.d_log_lengthscales[d], fd[d + 1]), 1e-5);
    }
  }
}

TEST(KernelProperties, CrossCovarianceMatchesPointwise) {
  std::mt19937_64 gen(3);
  auto p = KernelParams<double>::initial(2);
  p.log_lengthscales << 0.3, -0.2;
  const MatrixXd x = testing::random_matrix(gen, 4, 2);
  const MatrixXd z = testing::random_matrix(gen, 3, 2);
  const MatrixXd k = cross_covariance(p, x, z);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(k(i, j), rbf(p, x.row(i), z.row(j)), 1e-15);
}

TEST(KernelProperties, DimensionMismatchThrows) {
  const auto p = KernelParams<double>::initial(2);
  EXPECT_THROW(cross_covariance(p, MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 2)), Error);
}

}  // namespace
}  // namespace mvgp
