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

#ifndef MVGP_TRAINER_HPP_
#define MVGP_TRAINER_HPP_

#include <cstdint>
#include <vector>

#include "mvgp/data.hpp"
#include "mvgp/labels.hpp"
#include "mvgp/svgp.hpp"

namespace mvgp {

/// Linear warmup from lr_start to lr_end over `warmup_epochs`, then lr_main.
/// The warmup is interpolated per step, not per epoch.
struct LearningRateSchedule {
  Index warmup_epochs = 10;
  double lr_start = 0.01;
  double lr_end = 0.003;
  double lr_main = 0.003;

  double rate(Index epoch, Index step, Index steps_per_epoch) const;
  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  Index epochs = 30;
  Index batch_size = 64;
  LearningRateSchedule schedule;
  double beta = 1.0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Freezing switches; both on reproduces joint training of every group.
  bool train_kernel = true;
  bool train_inducing = true;
  SvgpOptions svgp;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_seconds;
};

/// Gradient of one view's share of the loss (-ELBO) w.r.t. its parameters,
/// laid out like ExpertParams.
struct ExpertGradient {
  double d_log_signal_variance = 0.0;
  VectorXd d_log_lengthscales;
  MatrixXd d_Z;
  MatrixXd d_m;
  std::vector<MatrixXd> d_L_S_raw;

  static ExpertGradient zeros_like(const ExpertParams& expert);
};

struct LossGradient {
  double loss = 0.0;
  std::vector<ExpertGradient> gradients;
};

/// -elbo_view and its gradient through the reverse-mode tape. Frozen groups
/// get zero gradients.
LossGradient expert_loss_gradient(const ExpertParams& expert, const MatrixXd& x_batch,
                                  const TransformedLabels<double>& labels_batch, double scale,
                                  double beta, const SvgpOptions& options = {},
                                  bool train_kernel = true, bool train_inducing = true);

/// Loss -sum_v elbo_v on an aligned batch and its gradient per view. Views
/// are differentiated in parallel; the result does not depend on the schedule.
LossGradient grad_loss(const std::vector<ExpertParams>& experts,
                       const std::vector<MatrixXd>& x_batch,
                       const TransformedLabels<double>& labels_batch, double scale, double beta,
                       const SvgpOptions& options = {}, bool train_kernel = true,
                       bool train_inducing = true);

/// Same loss evaluated without the tape.
double total_loss(const std::vector<ExpertParams>& experts, const std::vector<MatrixXd>& x,
                  const TransformedLabels<double>& labels, double scale, double beta,
                  const SvgpOptions& options = {});

/// Flat views of parameters and gradients, in a fixed order.
VectorXd pack_parameters(const ExpertParams& expert);
void unpack_parameters(const VectorXd& flat, ExpertParams& expert);
VectorXd pack_gradient(const ExpertGradient& gradient);

class AdamState {
 public:
  explicit AdamState(const AdamConfig& config = {}) : config_(config) {}
  /// One bias-corrected step on `params` (in place).
  void step(VectorXd& params, const VectorXd& gradient, double learning_rate);
  Index steps() const { return t_; }

 private:
  AdamConfig config_;
  VectorXd m_;
  VectorXd v_;
  Index t_ = 0;
};

/// Minibatch Adam on all experts jointly. Each epoch reshuffles with a
/// stream derived from cfg.seed; the recorded loss is the full-data loss at
/// the end of the epoch. Throws NonFiniteLoss naming the epoch.
TrainReport train(const MultiViewDataset& dataset, const TransformedLabels<double>& labels,
                  std::vector<ExpertParams>& experts, const TrainConfig& cfg);

}  // namespace mvgp

#endif  // MVGP_TRAINER_HPP_
