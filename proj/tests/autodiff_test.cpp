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

#include "mvgp/autodiff.hpp"

#include <functional>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace mvgp {
namespace {

using testing::random_matrix;

// Reduces an op's output to a scalar through a fixed random projection so
// every output entry contributes to the checked gradient.
using UnaryOp = std::function<ad::Var(ad::Tape&, const ad::Var&)>;

double max_op_error(const UnaryOp& op, const MatrixXd& x0, std::uint64_t seed, double h = 1e-5) {
  std::mt19937_64 gen(seed);
  MatrixXd weights;
  auto scalar = [&](ad::Tape& tape, const ad::Var& x) {
    const ad::Var y = op(tape, x);
    if (weights.size() == 0) weights = random_matrix(gen, y.rows(), y.cols());
    return ad::trace(ad::matmul(ad::transpose(tape.constant(weights)), y));
  };
  ad::Tape tape;
  const ad::Var x = tape.variable(x0);
  const ad::Var out = scalar(tape, x);
  tape.backward(out);
  const MatrixXd grad = tape.gradient(x);
  const VectorXd flat = x0.reshaped();
  const VectorXd fd = testing::central_difference(
      [&](const VectorXd& v) {
        ad::Tape t;
        return scalar(t, t.constant(v.reshaped(x0.rows(), x0.cols()))).scalar();
      },
      flat, h);
  double worst = 0.0;
  const VectorXd g = grad.reshaped();
  for (Index i = 0; i < fd.size(); ++i) worst = std::max(worst, testing::relative_error(g[i], fd[i]));
  return worst;
}

MatrixXd spd(std::mt19937_64& gen, Index n) {
  const MatrixXd a = random_matrix(gen, n, n);
  return a * a.transpose() + MatrixXd::Identity(n, n);
}

MatrixXd well_conditioned_lower(std::mt19937_64& gen, Index n) {
  MatrixXd l = random_matrix(gen, n, n, 0.3);
  l.triangularView<Eigen::StrictlyUpper>().setZero();
  l.diagonal() = l.diagonal().cwiseAbs().array() + 1.0;
  return l;
}

TEST(AutodiffProperties, MatmulAndTranspose) {
  std::mt19937_64 gen(1);
  const MatrixXd b = random_matrix(gen, 3, 2);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& x) { return ad::matmul(x, t.constant(b)); },
                         random_matrix(gen, 4, 3), 2),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& x) {
              return ad::matmul(t.constant(b.transpose()), ad::transpose(x));
            },
                         random_matrix(gen, 4, 3), 3),
            1e-5);
}

TEST(AutodiffProperties, CholeskyAdjoint) {
  std::mt19937_64 gen(4);
  const UnaryOp op = [](ad::Tape&, const ad::Var& x) {
    // Symmetrize so central differences stay on symmetric matrices.
    return ad::cholesky(ad::scale(ad::add(x, ad::transpose(x)), 0.5));
  };
  EXPECT_LT(max_op_error(op, spd(gen, 4), 5), 1e-5);
}

TEST(AutodiffProperties, TriangularSolveAdjoints) {
  std::mt19937_64 gen(6);
  const MatrixXd b = random_matrix(gen, 4, 3);
  const MatrixXd l = well_conditioned_lower(gen, 4);
  for (bool transposed : {false, true}) {
    EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& x) {
                return ad::tri_solve(ad::lower_from_log_diag(x), t.constant(b), transposed);
              },
                           [&] {
                             MatrixXd raw = l;
                             raw.diagonal() = l.diagonal().array().log();
                             return raw;
                           }(),
                           7),
              1e-5);
    EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& x) {
                return ad::tri_solve(t.constant(l), x, transposed);
              },
                           b, 8),
              1e-5);
  }
}

TEST(AutodiffProperties, RbfCrossAllArguments) {
  std::mt19937_64 gen(9);
  const MatrixXd x = random_matrix(gen, 5, 2);
  const MatrixXd z = random_matrix(gen, 3, 2);
  const MatrixXd sf = MatrixXd::Constant(1, 1, 0.3);
  MatrixXd ls(2, 1);
  ls << -0.2, 0.4;
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::rbf_cross(v, t.constant(z), t.constant(sf), t.constant(ls));
            },
                         x, 10),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::rbf_cross(t.constant(x), v, t.constant(sf), t.constant(ls));
            },
                         z, 11),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::rbf_cross(t.constant(x), t.constant(z), v, t.constant(ls));
            },
                         sf, 12),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::rbf_cross(t.constant(x), t.constant(z), t.constant(sf), v);
            },
                         ls, 13),
            1e-5);
  // Self covariance: both arguments are the same node.
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::rbf_cross(v, v, t.constant(sf), t.constant(ls));
            },
                         z, 14),
            1e-5);
}

TEST(AutodiffProperties, ReductionsAndFactors) {
  std::mt19937_64 gen(15);
  const MatrixXd a = random_matrix(gen, 4, 4);
  EXPECT_LT(max_op_error([](ad::Tape&, const ad::Var& v) { return ad::squared_norm(v); }, a, 16),
            1e-5);
  EXPECT_LT(max_op_error([](ad::Tape&, const ad::Var& v) { return ad::trace(v); }, a, 17), 1e-5);
  EXPECT_LT(max_op_error([](ad::Tape&, const ad::Var& v) {
              return ad::log_diag_sum(ad::lower_from_log_diag(v));
            },
                         a, 18),
            1e-5);
  for (bool diag_only : {false, true}) {
    EXPECT_LT(max_op_error([diag_only](ad::Tape&, const ad::Var& v) {
                return ad::lower_from_log_diag(v, diag_only);
              },
                           a, 19),
              1e-5);
  }
  EXPECT_LT(max_op_error([](ad::Tape&, const ad::Var& v) {
              return ad::add_scalar(ad::column(ad::sub(v, ad::scale(v, 3.0)), 2), 1.5);
            },
                         a, 20),
            1e-5);
}

TEST(AutodiffProperties, LikelihoodTerms) {
  std::mt19937_64 gen(21);
  const VectorXd y = random_matrix(gen, 5, 1);
  const VectorXd s2 = random_matrix(gen, 5, 1).cwiseAbs().array() + 0.3;
  const MatrixXd mean = random_matrix(gen, 5, 1);
  const MatrixXd var = random_matrix(gen, 5, 1).cwiseAbs().array() + 0.1;
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::gaussian_expected_log_lik(v, t.constant(var), y, s2);
            },
                         mean, 22),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::gaussian_expected_log_lik(t.constant(mean), v, y, s2);
            },
                         var, 23),
            1e-5);
  const MatrixXd w = 0.3 * random_matrix(gen, 3, 5);
  const MatrixXd p = random_matrix(gen, 3, 5);
  const MatrixXd sf = MatrixXd::Constant(1, 1, 0.2);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::marginal_variance(v, t.constant(w), t.constant(sf), 1e-8);
            },
                         p, 24),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::marginal_variance(t.constant(p), v, t.constant(sf), 1e-8);
            },
                         w, 25),
            1e-5);
  EXPECT_LT(max_op_error([&](ad::Tape& t, const ad::Var& v) {
              return ad::marginal_variance(t.constant(p), t.constant(w), v, 1e-8);
            },
                         sf, 26),
            1e-5);
}

TEST(AutodiffProperties, UnusedVariablesHaveZeroGradient) {
  ad::Tape tape;
  const ad::Var a = tape.variable(2.0);
  const ad::Var b = tape.variable(MatrixXd::Ones(2, 2));
  const ad::Var out = ad::squared_norm(a);
  tape.backward(out);
  EXPECT_DOUBLE_EQ(tape.gradient(a)(0, 0), 4.0);
  EXPECT_EQ(tape.gradient(b), MatrixXd::Zero(2, 2));
}

TEST(AutodiffProperties, SharedNodesAccumulate) {
  ad::Tape tape;
  const ad::Var a = tape.variable(3.0);
  const ad::Var out = ad::add(ad::squared_norm(a), ad::scale(a, 2.0));
  tape.backward(out);
  EXPECT_DOUBLE_EQ(tape.gradient(a)(0, 0), 8.0);
}

}  // namespace
}  // namespace mvgp
