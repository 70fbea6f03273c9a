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

// Shared fixtures and independent oracles for the test binaries.

#ifndef MVGP_TESTS_TEST_UTIL_HPP_
#define MVGP_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mvgp/labels.hpp"
#include "mvgp/svgp.hpp"
#include "mvgp/trainer.hpp"

namespace mvgp::testing {

inline MatrixXd random_matrix(std::mt19937_64& gen, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(gen);
  return m;
}

inline std::vector<int> random_labels(std::mt19937_64& gen, Index n, int num_classes) {
  std::uniform_int_distribution<int> u(0, num_classes - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = u(gen);
  return y;
}

/// A random expert whose variational parameters are away from the prior so
/// every gradient block is exercised.
inline ExpertParams random_expert(std::mt19937_64& gen, const MatrixXd& x, Index m_rows,
                                  int num_classes,
                                  CovarianceForm form = CovarianceForm::kFull) {
  ExpertParams e = init_expert(x, m_rows, num_classes, form, /*ard=*/true);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  e.kernel.log_signal_variance = u(gen);
  for (Index d = 0; d < e.kernel.log_lengthscales.size(); ++d) e.kernel.log_lengthscales[d] = u(gen);
  e.Z += 0.1 * random_matrix(gen, e.Z.rows(), e.Z.cols());
  e.m = random_matrix(gen, e.m.rows(), e.m.cols());
  for (auto& raw : e.L_S_raw) {
    MatrixXd r = 0.2 * random_matrix(gen, raw.rows(), raw.cols());
    r.triangularView<Eigen::StrictlyUpper>().setZero();
    if (form == CovarianceForm::kDiagonal) r.triangularView<Eigen::StrictlyLower>().setZero();
    r.diagonal() = r.diagonal().array() - 0.5;
    raw = r;
  }
  return e;
}

/// Central differences of `f` at `x0`.
inline VectorXd central_difference(const std::function<double(const VectorXd&)>& f,
                                   const VectorXd& x0, double h = 1e-4) {
  VectorXd g(x0.size());
  for (Index i = 0; i < x0.size(); ++i) {
    VectorXd xp = x0;
    VectorXd xm = x0;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(double a, double b, double floor = 1e-5) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Dense heteroscedastic GP regression posterior at the training inputs:
/// mean = K (K + D)^-1 y, cov = K - K (K + D)^-1 K.
struct DenseGpPosterior {
  VectorXd mean;
  VectorXd var;
  double log_marginal;
};

inline DenseGpPosterior dense_gp(const MatrixXd& k, const VectorXd& y, const VectorXd& noise) {
  const MatrixXd ky = k + MatrixXd(noise.asDiagonal());
  const Eigen::LDLT<MatrixXd> ldlt(ky);
  const VectorXd alpha = ldlt.solve(y);
  DenseGpPosterior out;
  out.mean = k * alpha;
  out.var = (k - k * ldlt.solve(k)).diagonal();
  const double log_det = ldlt.vectorD().array().log().sum();
  out.log_marginal = -0.5 * y.dot(alpha) - 0.5 * log_det -
                     0.5 * static_cast<double>(y.size()) * std::log(2.0 * 3.14159265358979323846);
  return out;
}

struct TinyProblem {
  std::vector<ExpertParams> experts;
  std::vector<MatrixXd> views;
  TransformedLabels<double> labels;
};

inline TinyProblem tiny_problem(std::uint64_t seed, Index n, Index m, Index d, int c, Index v_count) {
  std::mt19937_64 gen(seed);
  TinyProblem p;
  const auto y = random_labels(gen, n, c);
  p.labels = transform_labels(y, c, 0.01);
  for (Index v = 0; v < v_count; ++v) {
    p.views.push_back(random_matrix(gen, n, d));
    p.experts.push_back(random_expert(gen, p.views.back(), m, c));
  }
  return p;
}

/// Worst relative error between tape and central-difference gradients of
/// the summed loss over every parameter of every view.
inline double max_gradient_error(const TinyProblem& p, double scale, double beta) {
  const LossGradient lg = grad_loss(p.experts, p.views, p.labels, scale, beta);
  double worst = 0.0;
  for (std::size_t v = 0; v < p.experts.size(); ++v) {
    const VectorXd x0 = pack_parameters(p.experts[v]);
    auto f = [&](const VectorXd& x) {
      ExpertParams e = p.experts[v];
      unpack_parameters(x, e);
      return -elbo_view(e, p.views[v], p.labels, scale, beta);
    };
    const VectorXd fd = central_difference(f, x0);
    const VectorXd ad = pack_gradient(lg.gradients[v]);
    for (Index i = 0; i < fd.size(); ++i) worst = std::max(worst, relative_error(ad[i], fd[i]));
  }
  return worst;
}

}  // namespace mvgp::testing

#endif  // MVGP_TESTS_TEST_UTIL_HPP_
