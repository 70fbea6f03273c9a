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

#ifndef MVGP_NUMERICS_HPP_
#define MVGP_NUMERICS_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mvgp/error.hpp"

namespace mvgp {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kDefaultBaseJitter = 1e-6;
// Jitter escalates by x10 from the base up to base * 10^kJitterEscalations.
inline constexpr int kJitterEscalations = 6;

/// Lower Cholesky factor of `A + jitter_used * I`.
template <typename Scalar = double>
struct CholeskyFactor {
  DenseMatrix<Scalar> lower;
  Scalar jitter_used = Scalar(0);

  Index size() const { return lower.rows(); }

  Scalar log_determinant() const {
    return Scalar(2) * lower.diagonal().array().log().sum();
  }

  DenseMatrix<Scalar> reconstruct() const { return lower * lower.transpose(); }
};

/// Cholesky factorization with escalating diagonal jitter.
///
/// Tries `A + j I` for j in {0, base, 10 base, ..., 1e6 base} and returns the
/// first factor whose diagonal is strictly positive and finite.
template <typename Derived>
CholeskyFactor<typename Derived::Scalar> cholesky_psd(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar base_jitter = kDefaultBaseJitter) {
  using Scalar = typename Derived::Scalar;
  require(a.rows() == a.cols(), ErrorCode::kNonSquare,
          "cholesky_psd expects a square matrix, got " +
              std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  require(base_jitter >= Scalar(0), ErrorCode::kInvalidArgument,
          "base_jitter must be non-negative");
  const Scalar scale = Scalar(1) + a.cwiseAbs().maxCoeff();
  require((a - a.transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-10) * scale,
          ErrorCode::kInvalidArgument, "cholesky_psd expects a symmetric matrix");

  const Index n = a.rows();
  DenseMatrix<Scalar> work(n, n);
  for (int level = -1; level <= kJitterEscalations; ++level) {
    const Scalar jitter =
        level < 0 ? Scalar(0) : base_jitter * std::pow(Scalar(10), Scalar(level));
    if (level >= 0 && jitter == Scalar(0)) break;
    work = a;
    work.diagonal().array() += jitter;
    Eigen::LLT<DenseMatrix<Scalar>> llt(work);
    if (llt.info() != Eigen::Success) continue;
    DenseMatrix<Scalar> lower = llt.matrixL();
    const auto diag = lower.diagonal().array();
    if (!diag.allFinite() || (diag <= Scalar(0)).any()) continue;
    return CholeskyFactor<Scalar>{std::move(lower), jitter};
  }
  throw Error(ErrorCode::kNotPositiveDefinite,
              "matrix of size " + std::to_string(n) +
                  " is not positive definite at any jitter level");
}

/// Solves L X = B, or L^T X = B when `transposed`.
template <typename Scalar, typename Derived>
DenseMatrix<Scalar> tri_solve(const CholeskyFactor<Scalar>& factor,
                              const Eigen::MatrixBase<Derived>& b,
                              bool transposed = false) {
  require(factor.lower.rows() == factor.lower.cols(), ErrorCode::kNonSquare,
          "tri_solve expects a square factor");
  require(factor.lower.rows() == b.rows(), ErrorCode::kDimensionMismatch,
          "tri_solve: factor has " + std::to_string(factor.lower.rows()) +
              " rows, right-hand side has " + std::to_string(b.rows()));
  if (transposed) {
    return factor.lower.transpose().template triangularView<Eigen::Upper>().solve(b);
  }
  return factor.lower.template triangularView<Eigen::Lower>().solve(b);
}

/// Seeded random stream.
///
/// A (seed, stream_id) pair fully determines the sequence; `derive` hands out
/// independent child streams so that concurrent consumers never share state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RngStream derive(std::uint64_t child) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

VectorXd std_normal(RngStream& rng, Index n);

/// KL[N(mean_q, cov_q) || N(mean_p, cov_p)] for dense covariances.
double gaussian_kl(const VectorXd& mean_q, const MatrixXd& cov_q,
                   const VectorXd& mean_p, const MatrixXd& cov_p);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace mvgp

#endif  // MVGP_NUMERICS_HPP_
