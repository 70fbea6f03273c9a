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

#ifndef MVGP_KERNEL_HPP_
#define MVGP_KERNEL_HPP_

#include <cmath>
#include <string>

#include "mvgp/numerics.hpp"

namespace mvgp {

/// RBF hyperparameters in log space: sigma^2 = exp(log_signal_variance),
/// l_d = exp(log_lengthscales[d]).
///
/// With `ard == false` every lengthscale is tied to the same value; the
/// trainer keeps them equal by sharing their gradient.
template <typename Scalar = double>
struct KernelParams {
  Scalar log_signal_variance = Scalar(0);
  DenseVector<Scalar> log_lengthscales;
  bool ard = true;

  static KernelParams initial(Index input_dim, bool ard = true) {
    KernelParams p;
    p.log_lengthscales = DenseVector<Scalar>::Zero(input_dim);
    p.ard = ard;
    return p;
  }

  Index input_dim() const { return log_lengthscales.size(); }
  Scalar signal_variance() const { return std::exp(log_signal_variance); }
  DenseVector<Scalar> lengthscales() const { return log_lengthscales.array().exp(); }
};

template <typename Scalar = double>
struct KernelMatrices {
  DenseMatrix<Scalar> K_MM;
  DenseMatrix<Scalar> K_NM;
  DenseVector<Scalar> K_NN_diag;
};

template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar rbf(const KernelParams<Scalar>& params, const Eigen::MatrixBase<DerivedA>& x,
           const Eigen::MatrixBase<DerivedB>& x2) {
  require(x.size() == params.input_dim() && x2.size() == params.input_dim(),
          ErrorCode::kDimensionMismatch,
          "rbf expects vectors of length " + std::to_string(params.input_dim()));
  const auto inv_l = (-params.log_lengthscales.array()).exp();
  const Scalar r2 = ((x.derived().reshaped().array() - x2.derived().reshaped().array()) *
                     inv_l)
                        .square()
                        .sum();
  return params.signal_variance() * std::exp(Scalar(-0.5) * r2);
}

/// K[i, j] = rbf(X_i, Z_j) for row-wise inputs.
template <typename Scalar, typename DerivedX, typename DerivedZ>
DenseMatrix<Scalar> cross_covariance(const KernelParams<Scalar>& params,
                                     const Eigen::MatrixBase<DerivedX>& x,
                                     const Eigen::MatrixBase<DerivedZ>& z) {
  require(x.cols() == params.input_dim() && z.cols() == params.input_dim(),
          ErrorCode::kDimensionMismatch,
          "cross_covariance: inputs have " + std::to_string(x.cols()) + " and " +
              std::to_string(z.cols()) + " columns, kernel expects " +
              std::to_string(params.input_dim()));
  const DenseVector<Scalar> inv_l = (-params.log_lengthscales.array()).exp();
  const DenseMatrix<Scalar> xs = x * inv_l.asDiagonal();
  const DenseMatrix<Scalar> zs = z * inv_l.asDiagonal();
  DenseMatrix<Scalar> k(x.rows(), z.rows());
  // Explicit differences keep K(x, x) == sigma^2 exactly and K(Z, Z) symmetric.
  for (Index j = 0; j < zs.rows(); ++j) {
    k.col(j) = (xs.rowwise() - zs.row(j)).rowwise().squaredNorm();
  }
  return params.signal_variance() * (Scalar(-0.5) * k.array()).exp().matrix();
}

template <typename Scalar, typename DerivedX, typename DerivedZ>
KernelMatrices<Scalar> gram(const KernelParams<Scalar>& params,
                            const Eigen::MatrixBase<DerivedX>& x,
                            const Eigen::MatrixBase<DerivedZ>& z) {
  KernelMatrices<Scalar> out;
  out.K_NM = cross_covariance(params, x, z);
  out.K_MM = cross_covariance(params, z, z);
  out.K_NN_diag = DenseVector<Scalar>::Constant(x.rows(), params.signal_variance());
  return out;
}

/// Partial derivatives of rbf(x, x2) with respect to the log parameters.
template <typename Scalar>
struct RbfGradient {
  Scalar d_log_signal_variance;
  DenseVector<Scalar> d_log_lengthscales;
};

template <typename Scalar, typename DerivedA, typename DerivedB>
RbfGradient<Scalar> rbf_gradient(const KernelParams<Scalar>& params,
                                 const Eigen::MatrixBase<DerivedA>& x,
                                 const Eigen::MatrixBase<DerivedB>& x2) {
  const Scalar k = rbf(params, x, x2);
  const auto inv_l = (-params.log_lengthscales.array()).exp();
  const auto scaled_sq =
      ((x.derived().reshaped().array() - x2.derived().reshaped().array()) * inv_l).square();
  return {k, (k * scaled_sq).matrix()};
}

}  // namespace mvgp

#endif  // MVGP_KERNEL_HPP_
