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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "mvgp/autodiff.hpp"
#include "mvgp/parallel.hpp"

namespace mvgp {

double LearningRateSchedule::rate(Index epoch, Index step, Index steps_per_epoch) const {
  if (epoch >= warmup_epochs) return lr_main;
  const double progress =
      (static_cast<double>(epoch) +
       static_cast<double>(step) / static_cast<double>(std::max<Index>(steps_per_epoch, 1))) /
      static_cast<double>(warmup_epochs);
  return lr_start + (lr_end - lr_start) * progress;
}

void LearningRateSchedule::validate() const {
  require(warmup_epochs >= 0, ErrorCode::kInvalidArgument, "warmup_epochs must be >= 0");
  require(lr_start > 0.0 && lr_end > 0.0 && lr_main > 0.0, ErrorCode::kInvalidArgument,
          "learning rates must be positive");
}

void TrainConfig::validate() const {
  require(epochs >= 0, ErrorCode::kInvalidArgument, "epochs must be >= 0");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  require(beta >= 0.0, ErrorCode::kInvalidArgument, "beta must be >= 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 &&
              adam.eps > 0.0,
          ErrorCode::kInvalidArgument, "Adam needs beta1, beta2 in [0, 1) and eps > 0");
  schedule.validate();
  require(svgp.inducing_jitter >= 0.0 && svgp.base_jitter >= 0.0 && svgp.variance_floor > 0.0,
          ErrorCode::kInvalidArgument, "jitters must be >= 0 and the variance floor > 0");
}

ExpertGradient ExpertGradient::zeros_like(const ExpertParams& expert) {
  ExpertGradient g;
  g.d_log_lengthscales = VectorXd::Zero(expert.input_dim());
  g.d_Z = MatrixXd::Zero(expert.Z.rows(), expert.Z.cols());
  g.d_m = MatrixXd::Zero(expert.m.rows(), expert.m.cols());
  for (const auto& raw : expert.L_S_raw) g.d_L_S_raw.push_back(MatrixXd::Zero(raw.rows(), raw.cols()));
  return g;
}

LossGradient expert_loss_gradient(const ExpertParams& expert, const MatrixXd& x_batch,
                                  const TransformedLabels<double>& labels_batch, double scale,
                                  double beta, const SvgpOptions& options, bool train_kernel,
                                  bool train_inducing) {
  expert.validate();
  require(scale >= 1.0, ErrorCode::kInvalidArgument, "likelihood scale must be >= 1");
  require(beta >= 0.0, ErrorCode::kInvalidArgument, "beta must be >= 0");
  require(x_batch.cols() == expert.input_dim(), ErrorCode::kDimensionMismatch,
          "batch has " + std::to_string(x_batch.cols()) + " features, expert expects " +
              std::to_string(expert.input_dim()));
  require(labels_batch.size() == x_batch.rows() &&
              labels_batch.y_tilde.cols() == expert.num_classes(),
          ErrorCode::kMismatchedBatch, "labels do not match the feature batch");

  const bool diagonal = expert.covariance == CovarianceForm::kDiagonal;
  const Index num_classes = expert.num_classes();
  ad::Tape tape;
  auto param = [&](MatrixXd value, bool trainable) {
    return trainable ? tape.variable(std::move(value)) : tape.constant(std::move(value));
  };
  const ad::Var log_sf2 = param(MatrixXd::Constant(1, 1, expert.kernel.log_signal_variance),
                                train_kernel);
  const ad::Var log_ls = param(expert.kernel.log_lengthscales, train_kernel);
  const ad::Var z = param(expert.Z, train_inducing);
  const ad::Var m = tape.variable(expert.m);
  std::vector<ad::Var> raw;
  for (const auto& r : expert.L_S_raw) raw.push_back(tape.variable(r));
  const ad::Var x = tape.constant(x_batch);

  const Index num_z = expert.num_inducing();
  const ad::Var k_mm = ad::add(
      ad::rbf_cross(z, z, log_sf2, log_ls),
      tape.constant(MatrixXd::Identity(num_z, num_z) * options.inducing_jitter));
  const ad::Var chol = ad::cholesky(k_mm, options.base_jitter);
  const ad::Var w = ad::tri_solve(chol, ad::rbf_cross(z, x, log_sf2, log_ls));
  const ad::Var a = ad::tri_solve(chol, w, /*transposed=*/true);
  const ad::Var mean = ad::matmul(ad::transpose(a), m);

  ad::Var ell;
  ad::Var kl;
  const double m_rows = static_cast<double>(expert.num_inducing());
  for (Index c = 0; c < num_classes; ++c) {
    const ad::Var factor = ad::lower_from_log_diag(raw[static_cast<std::size_t>(c)], diagonal);
    const ad::Var var =
        ad::marginal_variance(ad::matmul(ad::transpose(factor), a), w, log_sf2,
                              options.variance_floor);
    const ad::Var ell_c = ad::gaussian_expected_log_lik(
        ad::column(mean, c), var, labels_batch.y_tilde.col(c), labels_batch.sigma2_tilde.col(c));
    ell = c == 0 ? ell_c : ad::add(ell, ell_c);
    if (beta == 0.0) continue;
    // 2 KL_c = |L^{-1} L_S|^2 + |L^{-1} m_c|^2 - M + log|K| - log|S|.
    ad::Var twice_kl = ad::add(ad::squared_norm(ad::tri_solve(chol, factor)),
                               ad::squared_norm(ad::tri_solve(chol, ad::column(m, c))));
    twice_kl = ad::add(twice_kl, ad::scale(ad::log_diag_sum(chol), 2.0));
    twice_kl = ad::sub(twice_kl, ad::scale(ad::log_diag_sum(factor), 2.0));
    twice_kl = ad::add_scalar(twice_kl, -m_rows);
    kl = c == 0 ? twice_kl : ad::add(kl, twice_kl);
  }
  ad::Var loss = ad::scale(ell, -scale);
  if (beta != 0.0) loss = ad::add(loss, ad::scale(kl, 0.5 * beta));
  tape.backward(loss);

  ExpertGradient g;
  g.d_log_signal_variance = tape.gradient(log_sf2)(0, 0);
  g.d_log_lengthscales = tape.gradient(log_ls).reshaped();
  if (!expert.kernel.ard) {
    g.d_log_lengthscales.setConstant(g.d_log_lengthscales.sum());
  }
  g.d_Z = tape.gradient(z);
  g.d_m = tape.gradient(m);
  for (const auto& r : raw) {
    MatrixXd d = tape.gradient(r);
    d.triangularView<Eigen::StrictlyUpper>().setZero();
    if (diagonal) d.triangularView<Eigen::StrictlyLower>().setZero();
    g.d_L_S_raw.push_back(std::move(d));
  }
  if (!train_kernel) {
    g.d_log_signal_variance = 0.0;
    g.d_log_lengthscales.setZero();
  }
  LossGradient out;
  out.loss = loss.scalar();
  out.gradients.push_back(std::move(g));
  return out;
}

LossGradient grad_loss(const std::vector<ExpertParams>& experts,
                       const std::vector<MatrixXd>& x_batch,
                       const TransformedLabels<double>& labels_batch, double scale, double beta,
                       const SvgpOptions& options, bool train_kernel, bool train_inducing) {
  require(!experts.empty(), ErrorCode::kInvalidArgument, "no experts");
  require(experts.size() == x_batch.size(), ErrorCode::kDimensionMismatch,
          std::to_string(experts.size()) + " experts but " + std::to_string(x_batch.size()) +
              " view blocks");
  for (const auto& x : x_batch) {
    require(x.rows() == x_batch.front().rows(), ErrorCode::kMismatchedBatch,
            "view blocks disagree on the batch size");
  }
  const auto v_count = static_cast<Index>(experts.size());
  std::vector<LossGradient> parts(experts.size());
  parallel_for(v_count, [&](Index v) {
    const auto i = static_cast<std::size_t>(v);
    parts[i] = expert_loss_gradient(experts[i], x_batch[i], labels_batch, scale, beta, options,
                                    train_kernel, train_inducing);
  });
  LossGradient out;
  for (auto& part : parts) {
    out.loss += part.loss;
    out.gradients.push_back(std::move(part.gradients.front()));
  }
  return out;
}

double total_loss(const std::vector<ExpertParams>& experts, const std::vector<MatrixXd>& x,
                  const TransformedLabels<double>& labels, double scale, double beta,
                  const SvgpOptions& options) {
  require(experts.size() == x.size(), ErrorCode::kDimensionMismatch,
          "expert and view counts differ");
  std::vector<double> parts(experts.size());
  parallel_for(static_cast<Index>(experts.size()), [&](Index v) {
    const auto i = static_cast<std::size_t>(v);
    parts[i] = -elbo_view(experts[i], x[i], labels, scale, beta, options);
  });
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

namespace {

Index packed_size(const ExpertParams& e) {
  Index n = 1 + e.kernel.log_lengthscales.size() + e.Z.size() + e.m.size();
  for (const auto& r : e.L_S_raw) n += r.size();
  return n;
}

template <typename Fn>
void walk(Index& offset, Index count, Fn&& fn) {
  fn(offset, count);
  offset += count;
}

}  // namespace

VectorXd pack_parameters(const ExpertParams& expert) {
  VectorXd flat(packed_size(expert));
  Index o = 0;
  flat[o++] = expert.kernel.log_signal_variance;
  walk(o, expert.kernel.log_lengthscales.size(),
       [&](Index at, Index n) { flat.segment(at, n) = expert.kernel.log_lengthscales; });
  walk(o, expert.Z.size(), [&](Index at, Index n) { flat.segment(at, n) = expert.Z.reshaped(); });
  walk(o, expert.m.size(), [&](Index at, Index n) { flat.segment(at, n) = expert.m.reshaped(); });
  for (const auto& r : expert.L_S_raw) {
    walk(o, r.size(), [&](Index at, Index n) { flat.segment(at, n) = r.reshaped(); });
  }
  return flat;
}

void unpack_parameters(const VectorXd& flat, ExpertParams& expert) {
  require(flat.size() == packed_size(expert), ErrorCode::kDimensionMismatch,
          "flat parameter vector has the wrong length");
  Index o = 0;
  expert.kernel.log_signal_variance = flat[o++];
  walk(o, expert.kernel.log_lengthscales.size(),
       [&](Index at, Index n) { expert.kernel.log_lengthscales = flat.segment(at, n); });
  walk(o, expert.Z.size(), [&](Index at, Index n) {
    expert.Z = flat.segment(at, n).reshaped(expert.Z.rows(), expert.Z.cols());
  });
  walk(o, expert.m.size(), [&](Index at, Index n) {
    expert.m = flat.segment(at, n).reshaped(expert.m.rows(), expert.m.cols());
  });
  for (auto& r : expert.L_S_raw) {
    walk(o, r.size(),
         [&](Index at, Index n) { r = flat.segment(at, n).reshaped(r.rows(), r.cols()); });
  }
}

VectorXd pack_gradient(const ExpertGradient& g) {
  Index total = 1 + g.d_log_lengthscales.size() + g.d_Z.size() + g.d_m.size();
  for (const auto& r : g.d_L_S_raw) total += r.size();
  VectorXd flat(total);
  Index o = 0;
  flat[o++] = g.d_log_signal_variance;
  walk(o, g.d_log_lengthscales.size(),
       [&](Index at, Index n) { flat.segment(at, n) = g.d_log_lengthscales; });
  walk(o, g.d_Z.size(), [&](Index at, Index n) { flat.segment(at, n) = g.d_Z.reshaped(); });
  walk(o, g.d_m.size(), [&](Index at, Index n) { flat.segment(at, n) = g.d_m.reshaped(); });
  for (const auto& r : g.d_L_S_raw) {
    walk(o, r.size(), [&](Index at, Index n) { flat.segment(at, n) = r.reshaped(); });
  }
  return flat;
}

void AdamState::step(VectorXd& params, const VectorXd& gradient, double learning_rate) {
  require(params.size() == gradient.size(), ErrorCode::kDimensionMismatch,
          "Adam: parameter and gradient sizes differ");
  if (m_.size() != params.size()) {
    m_ = VectorXd::Zero(params.size());
    v_ = VectorXd::Zero(params.size());
    t_ = 0;
  }
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * gradient;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  params.array() -=
      learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps);
}

TrainReport train(const MultiViewDataset& dataset, const TransformedLabels<double>& labels,
                  std::vector<ExpertParams>& experts, const TrainConfig& cfg) {
  cfg.validate();
  require(static_cast<Index>(experts.size()) == dataset.num_views(),
          ErrorCode::kDimensionMismatch,
          std::to_string(experts.size()) + " experts for " +
              std::to_string(dataset.num_views()) + " views");
  const Index n = dataset.size();
  require(labels.size() == n, ErrorCode::kMismatchedBatch,
          "label count differs from the dataset size");
  for (std::size_t v = 0; v < experts.size(); ++v) {
    experts[v].validate();
    require(experts[v].input_dim() == dataset.views[v].cols(), ErrorCode::kDimensionMismatch,
            "expert " + std::to_string(v) + " does not match its view's feature count");
  }

  TrainReport report;
  if (cfg.epochs == 0) return report;
  require(n >= 1, ErrorCode::kEmptyInput, "cannot train on an empty dataset");

  const Index batch = std::min(cfg.batch_size, n);
  const Index steps = (n + batch - 1) / batch;
  std::vector<AdamState> adam(experts.size(), AdamState(cfg.adam));
  std::vector<VectorXd> flat;
  for (const auto& e : experts) flat.push_back(pack_parameters(e));
  const RngStream root(cfg.seed, 0);

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    RngStream rng = root.derive(static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (Index s = 0; s < steps; ++s) {
      const Index begin = s * batch;
      const Index len = std::min(batch, n - begin);
      const std::span<const Index> idx(order.data() + begin, static_cast<std::size_t>(len));
      const std::vector<Index> rows(idx.begin(), idx.end());
      std::vector<MatrixXd> x_batch;
      for (const auto& view : dataset.views) x_batch.push_back(view(rows, Eigen::all));
      const auto y_batch = labels.rows(idx);
      const double scale = static_cast<double>(n) / static_cast<double>(len);
      const LossGradient lg = grad_loss(experts, x_batch, y_batch, scale, cfg.beta, cfg.svgp,
                                        cfg.train_kernel, cfg.train_inducing);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "non-finite minibatch loss in epoch " + std::to_string(epoch));
      }
      const double lr = cfg.schedule.rate(epoch, s, steps);
      for (std::size_t v = 0; v < experts.size(); ++v) {
        adam[v].step(flat[v], pack_gradient(lg.gradients[v]), lr);
        unpack_parameters(flat[v], experts[v]);
      }
    }
    double loss = 0.0;
    try {
      loss = total_loss(experts, dataset.views, labels, 1.0, cfg.beta, cfg.svgp);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::kNumerical) throw;
      throw Error(ErrorCode::kNonFiniteLoss,
                  "numerical failure in epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kNonFiniteLoss, "non-finite loss in epoch " + std::to_string(epoch));
    }
    report.epoch_loss.push_back(loss);
    report.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return report;
}

}  // namespace mvgp
