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

#include <numbers>
#include <string>

namespace mvgp::ad {
namespace {

std::string shape(const MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_tape(const Var& a, const Var& b) {
  require(a.tape() != nullptr && a.tape() == b.tape(), ErrorCode::kInvalidArgument,
          "variables live on different tapes");
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::kDimensionMismatch,
          std::string(op) + ": " + shape(a.value()) + " vs " + shape(b.value()));
}

}  // namespace

const MatrixXd& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  require(rows() == 1 && cols() == 1, ErrorCode::kDimensionMismatch,
          "scalar() on a " + shape(value()) + " node");
  return value()(0, 0);
}

Var Tape::constant(MatrixXd value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(MatrixXd value) {
  nodes_.push_back(Node{std::move(value), {}, true, false, {}});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::variable(double value) { return variable(MatrixXd::Constant(1, 1, value)); }

Var Tape::record(MatrixXd value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    require(in.tape() == this, ErrorCode::kInvalidArgument, "input from another tape");
    needs = needs || needs_grad(in);
  }
  nodes_.push_back(Node{std::move(value), {}, needs, false, needs ? std::move(backward) : Backward{}});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(const Var& v, const MatrixXd& adjoint) {
  Node& node = nodes_[static_cast<std::size_t>(v.id())];
  if (!node.needs_grad) return;
  if (node.has_grad) {
    node.grad += adjoint;
  } else {
    node.grad = adjoint;
    node.has_grad = true;
  }
}

void Tape::backward(const Var& output) {
  require(output.tape() == this, ErrorCode::kInvalidArgument, "output from another tape");
  require(output.rows() == 1 && output.cols() == 1, ErrorCode::kDimensionMismatch,
          "backward needs a scalar output");
  for (auto& node : nodes_) {
    node.has_grad = false;
    node.grad.resize(0, 0);
  }
  accumulate(output, MatrixXd::Ones(1, 1));
  for (int id = output.id(); id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.has_grad && node.backward) node.backward(*this, node.grad);
  }
}

MatrixXd Tape::gradient(const Var& v) const {
  const Node& node = nodes_[static_cast<std::size_t>(v.id())];
  if (!node.has_grad) return MatrixXd::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

Var add(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "add");
  return a.tape()->record(a.value() + b.value(), {a, b},
                          [a, b](Tape& t, const MatrixXd& g) {
                            t.accumulate(a, g);
                            t.accumulate(b, g);
                          });
}

Var sub(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "sub");
  return a.tape()->record(a.value() - b.value(), {a, b},
                          [a, b](Tape& t, const MatrixXd& g) {
                            t.accumulate(a, g);
                            t.accumulate(b, -g);
                          });
}

Var scale(const Var& a, double factor) {
  return a.tape()->record(factor * a.value(), {a}, [a, factor](Tape& t, const MatrixXd& g) {
    t.accumulate(a, factor * g);
  });
}

Var add_scalar(const Var& a, double constant) {
  return a.tape()->record(a.value().array() + constant, {a},
                          [a](Tape& t, const MatrixXd& g) { t.accumulate(a, g); });
}

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require(a.cols() == b.rows(), ErrorCode::kDimensionMismatch,
          "matmul: " + shape(a.value()) + " * " + shape(b.value()));
  Tape& tape = *a.tape();
  return tape.record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const MatrixXd& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(const Var& a) {
  return a.tape()->record(a.value().transpose(), {a}, [a](Tape& t, const MatrixXd& g) {
    t.accumulate(a, g.transpose());
  });
}

Var column(const Var& a, Index c) {
  require(c >= 0 && c < a.cols(), ErrorCode::kDimensionMismatch, "column index out of range");
  return a.tape()->record(a.value().col(c), {a}, [a, c](Tape& t, const MatrixXd& g) {
    MatrixXd full = MatrixXd::Zero(a.rows(), a.cols());
    full.col(c) = g;
    t.accumulate(a, full);
  });
}

Var cholesky(const Var& a, double base_jitter) {
  auto factor = cholesky_psd(a.value(), base_jitter);
  MatrixXd lower = std::move(factor.lower);
  const int self = static_cast<int>(a.tape()->size());
  return a.tape()->record(lower, {a}, [a, self](Tape& t, const MatrixXd& g) {
    const MatrixXd& l = t.value(self);
    const auto tri = l.triangularView<Eigen::Lower>();
    // Phi(L^T Lbar): lower triangle with the diagonal halved.
    MatrixXd p = l.transpose() * g.triangularView<Eigen::Lower>();
    p.triangularView<Eigen::StrictlyUpper>().setZero();
    p.diagonal() *= 0.5;
    // S = L^{-T} P L^{-1}; the symmetric part is the adjoint of A.
    const MatrixXd y = tri.transpose().solve(p);
    const MatrixXd s = tri.transpose().solve(y.transpose()).transpose();
    t.accumulate(a, 0.5 * (s + s.transpose()));
  });
}

Var tri_solve(const Var& lower, const Var& b, bool transposed) {
  require_same_tape(lower, b);
  require(lower.rows() == lower.cols(), ErrorCode::kNonSquare, "tri_solve expects square L");
  require(lower.rows() == b.rows(), ErrorCode::kDimensionMismatch,
          "tri_solve: " + shape(lower.value()) + " vs " + shape(b.value()));
  const auto tri = lower.value().triangularView<Eigen::Lower>();
  MatrixXd x = transposed ? MatrixXd(tri.transpose().solve(b.value()))
                          : MatrixXd(tri.solve(b.value()));
  const int self = static_cast<int>(lower.tape()->size());
  return lower.tape()->record(
      std::move(x), {lower, b}, [lower, b, transposed, self](Tape& t, const MatrixXd& g) {
        const auto tri = lower.value().triangularView<Eigen::Lower>();
        const MatrixXd& x = t.value(self);
        const MatrixXd b_bar =
            transposed ? MatrixXd(tri.solve(g)) : MatrixXd(tri.transpose().solve(g));
        if (t.needs_grad(lower)) {
          MatrixXd l_bar = transposed ? MatrixXd(-x * b_bar.transpose())
                                      : MatrixXd(-b_bar * x.transpose());
          l_bar.triangularView<Eigen::StrictlyUpper>().setZero();
          t.accumulate(lower, l_bar);
        }
        t.accumulate(b, b_bar);
      });
}

Var rbf_cross(const Var& x, const Var& z, const Var& log_sf2, const Var& log_ls) {
  require_same_tape(x, z);
  require_same_tape(x, log_sf2);
  require_same_tape(x, log_ls);
  const Index d = x.cols();
  require(z.cols() == d && log_ls.value().size() == d && log_sf2.value().size() == 1,
          ErrorCode::kDimensionMismatch, "rbf_cross: inconsistent input dimensions");
  const VectorXd inv_l = (-log_ls.value().reshaped().array()).exp();
  const MatrixXd xs = x.value() * inv_l.asDiagonal();
  const MatrixXd zs = z.value() * inv_l.asDiagonal();
  MatrixXd k(x.rows(), z.rows());
  for (Index j = 0; j < zs.rows(); ++j) {
    k.col(j) = (xs.rowwise() - zs.row(j)).rowwise().squaredNorm();
  }
  const double sf2 = std::exp(log_sf2.value()(0, 0));
  k = sf2 * (-0.5 * k.array()).exp();

  const int self = static_cast<int>(x.tape()->size());
  return x.tape()->record(std::move(k), {x, z, log_sf2, log_ls},
                          [x, z, log_sf2, log_ls, self](Tape& t, const MatrixXd& g) {
    const MatrixXd e = g.cwiseProduct(t.value(self));
    const MatrixXd& xv = x.value();
    const MatrixXd& zv = z.value();
    const VectorXd inv_l2 = (-2.0 * log_ls.value().reshaped().array()).exp();
    if (t.needs_grad(log_sf2)) t.accumulate(log_sf2, MatrixXd::Constant(1, 1, e.sum()));
    const VectorXd row_sum = e.rowwise().sum();
    const VectorXd col_sum = e.colwise().sum().transpose();
    if (t.needs_grad(x)) {
      const MatrixXd dx = -(row_sum.asDiagonal() * xv - e * zv) * inv_l2.asDiagonal();
      t.accumulate(x, dx);
    }
    if (t.needs_grad(z)) {
      const MatrixXd dz = (e.transpose() * xv - col_sum.asDiagonal() * zv) * inv_l2.asDiagonal();
      t.accumulate(z, dz);
    }
    if (t.needs_grad(log_ls)) {
      VectorXd dls = VectorXd::Zero(xv.cols());
      for (Index dim = 0; dim < xv.cols(); ++dim) {
        double acc = 0.0;
        for (Index j = 0; j < zv.rows(); ++j) {
          acc += ((xv.col(dim).array() - zv(j, dim)).square() * e.col(j).array()).sum();
        }
        dls[dim] = acc * inv_l2[dim];
      }
      t.accumulate(log_ls, dls.reshaped(log_ls.rows(), log_ls.cols()));
    }
  });
}

Var lower_from_log_diag(const Var& raw, bool diagonal_only) {
  require(raw.rows() == raw.cols(), ErrorCode::kNonSquare, "lower_from_log_diag: square input");
  MatrixXd l = MatrixXd::Zero(raw.rows(), raw.cols());
  if (!diagonal_only) l.triangularView<Eigen::StrictlyLower>() = raw.value();
  l.diagonal() = raw.value().diagonal().array().exp();
  const int self = static_cast<int>(raw.tape()->size());
  return raw.tape()->record(std::move(l), {raw},
                            [raw, diagonal_only, self](Tape& t, const MatrixXd& g) {
    MatrixXd r = MatrixXd::Zero(g.rows(), g.cols());
    if (!diagonal_only) r.triangularView<Eigen::StrictlyLower>() = g;
    r.diagonal() = g.diagonal().cwiseProduct(t.value(self).diagonal());
    t.accumulate(raw, r);
  });
}

Var squared_norm(const Var& a) {
  return a.tape()->record(MatrixXd::Constant(1, 1, a.value().squaredNorm()), {a},
                          [a](Tape& t, const MatrixXd& g) {
                            t.accumulate(a, 2.0 * g(0, 0) * a.value());
                          });
}

Var log_diag_sum(const Var& a) {
  require(a.rows() == a.cols(), ErrorCode::kNonSquare, "log_diag_sum: square input");
  return a.tape()->record(
      MatrixXd::Constant(1, 1, a.value().diagonal().array().log().sum()), {a},
      [a](Tape& t, const MatrixXd& g) {
        MatrixXd r = MatrixXd::Zero(a.rows(), a.cols());
        r.diagonal() = g(0, 0) * a.value().diagonal().cwiseInverse();
        t.accumulate(a, r);
      });
}

Var trace(const Var& a) {
  require(a.rows() == a.cols(), ErrorCode::kNonSquare, "trace: square input");
  return a.tape()->record(MatrixXd::Constant(1, 1, a.value().trace()), {a},
                          [a](Tape& t, const MatrixXd& g) {
                            t.accumulate(a, g(0, 0) * MatrixXd::Identity(a.rows(), a.cols()));
                          });
}

Var marginal_variance(const Var& projected, const Var& w, const Var& log_sf2, double floor) {
  require_same_tape(projected, w);
  require_same_shape(projected, w, "marginal_variance");
  const double sf2 = std::exp(log_sf2.value()(0, 0));
  const VectorXd raw = projected.value().colwise().squaredNorm().transpose() -
                       w.value().colwise().squaredNorm().transpose() +
                       VectorXd::Constant(w.cols(), sf2);
  const VectorXd active = (raw.array() > floor).cast<double>();
  MatrixXd value = raw.cwiseMax(floor);
  return projected.tape()->record(
      std::move(value), {projected, w, log_sf2},
      [projected, w, log_sf2, active, sf2](Tape& t, const MatrixXd& g) {
        const VectorXd ga = g.col(0).cwiseProduct(active);
        if (t.needs_grad(projected)) {
          t.accumulate(projected, 2.0 * projected.value() * ga.asDiagonal());
        }
        if (t.needs_grad(w)) t.accumulate(w, -2.0 * w.value() * ga.asDiagonal());
        t.accumulate(log_sf2, MatrixXd::Constant(1, 1, sf2 * ga.sum()));
      });
}

Var gaussian_expected_log_lik(const Var& mean, const Var& var, const VectorXd& y,
                              const VectorXd& s2) {
  require_same_tape(mean, var);
  require(mean.cols() == 1 && var.cols() == 1 && mean.rows() == y.size() &&
              var.rows() == y.size() && s2.size() == y.size(),
          ErrorCode::kDimensionMismatch, "gaussian_expected_log_lik: shape mismatch");
  const VectorXd residual = y - mean.value().col(0);
  const double value =
      (-0.5 * (2.0 * std::numbers::pi * s2.array()).log() -
       (residual.array().square() + var.value().col(0).array()) / (2.0 * s2.array()))
          .sum();
  return mean.tape()->record(MatrixXd::Constant(1, 1, value), {mean, var},
                             [mean, var, residual, s2](Tape& t, const MatrixXd& g) {
                               const double go = g(0, 0);
                               t.accumulate(mean, go * residual.cwiseQuotient(s2));
                               t.accumulate(var, (-0.5 * go) * s2.cwiseInverse());
                             });
}

}  // namespace mvgp::ad
