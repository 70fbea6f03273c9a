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

// Matrix-valued reverse-mode differentiation.
//
// Every node on the tape holds a dense matrix. Operations record a closure
// that maps the adjoint of their output to adjoints of their inputs; calling
// Tape::backward on a 1x1 node sweeps the tape once in reverse order.

#ifndef MVGP_AUTODIFF_HPP_
#define MVGP_AUTODIFF_HPP_

#include <deque>
#include <functional>
#include <initializer_list>

#include "mvgp/numerics.hpp"

namespace mvgp::ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const MatrixXd& value() const;
  double scalar() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Maps the adjoint of a node's output onto its inputs' adjoints.
  using Backward = std::function<void(Tape&, const MatrixXd&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(MatrixXd value);
  Var variable(MatrixXd value);
  Var variable(double value);

  /// Seeds d(output)/d(output) = 1 and propagates. `output` must be 1x1.
  void backward(const Var& output);

  /// Adjoint of `v`; a zero matrix when `v` does not influence the output.
  MatrixXd gradient(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }

  // Op-implementation interface.
  Var record(MatrixXd value, std::initializer_list<Var> inputs, Backward backward);
  const MatrixXd& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(const Var& v) const {
    return nodes_[static_cast<std::size_t>(v.id())].needs_grad;
  }
  void accumulate(const Var& v, const MatrixXd& adjoint);

 private:
  struct Node {
    MatrixXd value;
    MatrixXd grad;
    bool needs_grad = false;
    bool has_grad = false;
    Backward backward;
  };

  // Deque keeps node addresses stable while closures run.
  std::deque<Node> nodes_;
};

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double constant);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var column(const Var& a, Index c);

/// Lower Cholesky factor of a symmetric input with the same jitter
/// escalation as cholesky_psd.
Var cholesky(const Var& a, double base_jitter = kDefaultBaseJitter);

/// Solves L X = B (or L^T X = B) for lower-triangular L.
Var tri_solve(const Var& lower, const Var& b, bool transposed = false);

/// RBF cross-covariance K[i, j] = exp(log_sf2) exp(-0.5 |(x_i - z_j) / l|^2),
/// with l = exp(log_ls). `log_sf2` is 1x1; `log_ls` has D entries.
Var rbf_cross(const Var& x, const Var& z, const Var& log_sf2, const Var& log_ls);

/// Strict lower triangle of `raw` plus exp of its diagonal. With
/// `diagonal_only` the strict lower triangle is dropped.
Var lower_from_log_diag(const Var& raw, bool diagonal_only = false);

Var squared_norm(const Var& a);
Var log_diag_sum(const Var& a);
Var trace(const Var& a);

/// Column-wise marginal variance of q(f):
/// max(|P_:,i|^2 + exp(log_sf2) - |W_:,i|^2, floor) as a B x 1 column.
Var marginal_variance(const Var& projected, const Var& w, const Var& log_sf2, double floor);

/// Sum over i of E_{N(f; mean_i, var_i)} log N(y_i; f, s2_i).
Var gaussian_expected_log_lik(const Var& mean, const Var& var, const VectorXd& y,
                              const VectorXd& s2);

}  // namespace mvgp::ad

#endif  // MVGP_AUTODIFF_HPP_
