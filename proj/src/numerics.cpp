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

#include "mvgp/numerics.hpp"

#include <limits>

namespace mvgp {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(mix64(mix64(seed) ^ (stream_id * 0xd1b54a32d192ed03ULL))) {}

RngStream RngStream::derive(std::uint64_t child) const {
  return RngStream(seed_, mix64(stream_id_ + 1) ^ mix64(child + 0x632be59bd9b4e019ULL));
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  require(n > 0, ErrorCode::kInvalidArgument, "uniform_index needs n > 0");
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method; portable across standard libraries unlike
  // std::normal_distribution.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

VectorXd std_normal(RngStream& rng, Index n) {
  require(n >= 1, ErrorCode::kInvalidArgument, "std_normal needs n >= 1");
  VectorXd out(n);
  for (Index i = 0; i < n; ++i) out[i] = rng.normal();
  return out;
}

double gaussian_kl(const VectorXd& mean_q, const MatrixXd& cov_q,
                   const VectorXd& mean_p, const MatrixXd& cov_p) {
  const Index k = mean_q.size();
  require(mean_p.size() == k && cov_q.rows() == k && cov_q.cols() == k &&
              cov_p.rows() == k && cov_p.cols() == k,
          ErrorCode::kDimensionMismatch, "gaussian_kl shape mismatch");
  const auto lp = cholesky_psd(cov_p, 0.0);
  const auto lq = cholesky_psd(cov_q, 0.0);
  const MatrixXd a = tri_solve(lp, lq.lower);
  const VectorXd d = tri_solve(lp, mean_p - mean_q);
  return 0.5 * (a.squaredNorm() + d.squaredNorm() - static_cast<double>(k) +
                lp.log_determinant() - lq.log_determinant());
}

}  // namespace mvgp
