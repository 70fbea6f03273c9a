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

// mvgp: command-line runner for multi-view GP experiments.
//
//   mvgp synth --out DIR
//   mvgp train --data DIR --out RUN
//   mvgp eval --checkpoint RUN/checkpoint.json --out EVAL
//   mvgp noise-sweep --data DIR --out SWEEP
//   mvgp ood --data DIR --ood OOD_DIR --out OOD
//   mvgp sweep --param m --values 10,50,200 --out SWEEP
//
// Without --data the default synthetic moons set is generated in memory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mvgp/experiment.hpp"

namespace fs = std::filesystem;
using namespace mvgp;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct CommonOptions {
  std::string covariance = "full";
  std::string weighting = "uniform";
  std::string normalize = "auto";
  bool no_ard = false;
};

void add_data_options(CLI::App* cmd, ExperimentConfig& cfg, CommonOptions& common) {
  cmd->add_option("--data", cfg.data_dir, "Dataset directory (default: synthetic moons)");
  cmd->add_option("--synth-seed", cfg.synth_seed, "Seed of the in-memory synthetic set")
      ->capture_default_str();
  cmd->add_option("--train-fraction", cfg.train_fraction, "Train share of the split")
      ->capture_default_str();
  cmd->add_option("--normalize", common.normalize,
                  "z-score views with train statistics (auto: only for --data)")
      ->check(CLI::IsMember({"auto", "on", "off"}))
      ->capture_default_str();
}

void add_model_options(CLI::App* cmd, ExperimentConfig& cfg, CommonOptions& common) {
  auto& t = cfg.train;
  cmd->add_option("--m", cfg.num_inducing, "Inducing points per view")->capture_default_str();
  cmd->add_option("--alpha-eps", cfg.alpha_eps, "Dirichlet prior concentration")
      ->capture_default_str();
  cmd->add_option("--beta", t.beta, "KL weight")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size, "Minibatch size")->capture_default_str();
  cmd->add_option("--warmup-epochs", t.schedule.warmup_epochs)->capture_default_str();
  cmd->add_option("--lr-start", t.schedule.lr_start)->capture_default_str();
  cmd->add_option("--lr-end", t.schedule.lr_end)->capture_default_str();
  cmd->add_option("--lr-main", t.schedule.lr_main)->capture_default_str();
  cmd->add_option("--covariance", common.covariance, "Variational covariance form")
      ->check(CLI::IsMember({"full", "diagonal"}))
      ->capture_default_str();
  cmd->add_flag("--no-ard", common.no_ard, "Share one lengthscale across input dimensions");
  cmd->add_option("--inducing-jitter", t.svgp.inducing_jitter, "Constant added to the K_MM diagonal")
      ->capture_default_str();
}

void add_predict_options(CLI::App* cmd, ExperimentConfig& cfg, CommonOptions& common) {
  cmd->add_option("--mc-samples", cfg.mc_samples, "Monte-Carlo samples per test point")
      ->capture_default_str();
  cmd->add_option("--weighting", common.weighting, "View weighting")
      ->check(CLI::IsMember({"uniform", "negentropy"}))
      ->capture_default_str();
  cmd->add_option("--temperature", cfg.policy.temperature, "Softmax temperature of the weights")
      ->capture_default_str();
  cmd->add_option("--bins", cfg.ece_bins, "ECE bins")->capture_default_str();
}

void apply_common(const CommonOptions& common, ExperimentConfig& cfg) {
  cfg.covariance = common.covariance == "full" ? CovarianceForm::kFull : CovarianceForm::kDiagonal;
  cfg.ard = !common.no_ard;
  if (common.normalize != "auto") cfg.normalize = common.normalize == "on";
  cfg.policy.mode =
      common.weighting == "uniform" ? WeightMode::kUniform : WeightMode::kNegentropySoftmax;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void write_records(const fs::path& out_dir, const std::string& stem,
                   const std::vector<ResultRecord>& records, Manifest& manifest) {
  Json all = Json::array();
  for (const auto& r : records) all.push_back(r.to_json());
  write_json(out_dir / (stem + ".json"), all);
  manifest.add("records", out_dir / (stem + ".json"));

  const fs::path csv = out_dir / (stem + ".csv");
  std::ofstream out(csv);
  out << "experiment_id,config_hash,seed,accuracy,ece,auroc,train_seconds,test_seconds\n";
  for (const auto& r : records) {
    for (const auto& s : r.per_seed) {
      out << csv_escape(r.experiment_id) << ',' << r.config_hash << ',' << s.seed << ','
          << format_double(s.metrics.accuracy) << ',' << format_double(s.metrics.ece) << ','
          << (s.metrics.auroc ? format_double(*s.metrics.auroc) : "") << ','
          << format_double(s.train_seconds) << ',' << format_double(s.test_seconds) << '\n';
    }
  }
  manifest.add("records_csv", csv);
}

void print_record(const ResultRecord& r) {
  const auto [acc, acc_sd] = r.summary("accuracy");
  const auto [ece_m, ece_sd] = r.summary("ece");
  std::printf("%s  accuracy %.4f +- %.4f  ece %.4f +- %.4f", r.experiment_id.c_str(), acc,
              acc_sd, ece_m, ece_sd);
  const auto [au, au_sd] = r.summary("auroc");
  if (!std::isnan(au)) std::printf("  auroc %.4f +- %.4f", au, au_sd);
  std::printf("\n");
}

// synth ---------------------------------------------------------------------

struct SynthOptions {
  std::string out;
  MoonsConfig moons;
  std::uint64_t seed = 0;
  bool views_equal = false;
};

void run_synth(const SynthOptions& o) {
  MoonsConfig moons = o.moons;
  if (o.views_equal) {
    require(!moons.radii.empty(), ErrorCode::kInvalidArgument, "need a radius");
    moons.radii.assign(moons.radii.size(), moons.radii.front());
    moons.translate_overlap_view = false;
  }
  RngStream rng = seed_stream(o.seed, SeedStream::kSynth);
  const MoonsData data = make_moons_multiview(moons, rng);
  const fs::path out = o.out;
  const Json meta{{"generator",
                   {{"kind", "moons"},
                    {"seed", o.seed},
                    {"n_per_class", moons.n_per_class},
                    {"radii", moons.radii},
                    {"noise", moons.noise},
                    {"ood_count", moons.ood_count},
                    {"ood_std", moons.ood_std},
                    {"overlap_view", moons.overlap_view},
                    {"translation", {data.translation.x(), data.translation.y()}}}}};
  save_dataset(data.dataset, out, meta);
  Manifest manifest(out);
  manifest.add("meta", out / "meta.json");
  for (Index v = 0; v < data.dataset.num_views(); ++v) {
    manifest.add("view", out / ("view_" + std::to_string(v) + ".csv"));
  }
  manifest.add("labels", out / "labels.csv");
  if (moons.ood_count > 0) {
    save_unlabeled_views(data.ood_views, "moons_ood", out / "ood", meta);
    manifest.add("ood", out / "ood" / "meta.json");
  }
  manifest.write();
  std::printf("wrote %lld samples in %lld views to %s\n",
              static_cast<long long>(data.dataset.size()),
              static_cast<long long>(data.dataset.num_views()), out.c_str());
}

// train / eval --------------------------------------------------------------

void run_train(ExperimentConfig cfg, std::uint64_t seed) {
  cfg.seeds = {seed};
  cfg.validate();
  const fs::path out = cfg.out_dir;
  const SourceData data = load_source(cfg);
  const PreparedSplit prep = prepare_split(data.dataset, cfg.train_fraction, seed, cfg.normalizes());
  const Model model = fit_model(prep.normalized.train, prep.normalized.stats, cfg, seed);

  Manifest manifest(out);
  Json ckpt = checkpoint_to_json(model, cfg, seed);
  ckpt["data"] = data.provenance;
  write_json(out / "checkpoint.json", ckpt);
  manifest.add("checkpoint", out / "checkpoint.json");
  Json report = train_report_to_json(model.report);
  report["config_hash"] = cfg.hash();
  report["train_seconds"] = model.train_seconds;
  write_json(out / "train_report.json", report);
  manifest.add("train_report", out / "train_report.json");
  manifest.set("command", "train");
  manifest.set("config_hash", cfg.hash());
  manifest.write();
  std::printf("trained %zu experts on %lld samples; final loss %s\n", model.experts.size(),
              static_cast<long long>(prep.normalized.train.size()),
              model.report.epoch_loss.empty() ? "n/a"
                                              : format_double(model.report.epoch_loss.back()).c_str());
}

struct EvalOptions {
  std::string checkpoint;
  std::string test_data;
  std::string ood;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void run_eval(const EvalOptions& o, const CLI::App& cmd, const ExperimentConfig& overrides,
              const CommonOptions& common) {
  const Json ckpt = read_json(o.checkpoint);
  const Model model = model_from_checkpoint(ckpt);
  ExperimentConfig cfg = ExperimentConfig::from_json(ckpt.at("config"));
  const std::uint64_t train_seed = ckpt.at("seed").get<std::uint64_t>();
  const std::uint64_t seed = o.seed.value_or(train_seed);
  if (cmd.count("--mc-samples")) cfg.mc_samples = overrides.mc_samples;
  if (cmd.count("--temperature")) cfg.policy.temperature = overrides.policy.temperature;
  if (cmd.count("--bins")) cfg.ece_bins = overrides.ece_bins;
  if (cmd.count("--weighting")) {
    cfg.policy.mode =
        common.weighting == "uniform" ? WeightMode::kUniform : WeightMode::kNegentropySoftmax;
  }
  cfg.policy.validate();

  MultiViewDataset test;
  if (!o.test_data.empty()) {
    test = model.stats.apply(load_dataset(o.test_data));
  } else {
    const SourceData data = load_source(cfg);
    test = prepare_split(data.dataset, cfg.train_fraction, train_seed, cfg.normalizes()).normalized.test;
  }
  require(test.num_views() == static_cast<Index>(model.experts.size()),
          ErrorCode::kDimensionMismatch, "test set and checkpoint disagree on the view count");

  const DirichletMoments moments = predict_model(model, test.views, cfg, seed, 0);
  MetricsReport metrics = evaluate(moments, test.labels, cfg.ece_bins);
  if (!o.ood.empty()) {
    MultiViewDataset ood;
    ood.views = load_unlabeled_views(o.ood);
    const DirichletMoments out = predict_model(model, model.stats.apply(ood).views, cfg, seed, 1);
    metrics.auroc = auroc(
        std::span<const double>(out.uncertainty.data(), static_cast<std::size_t>(out.uncertainty.size())),
        std::span<const double>(moments.uncertainty.data(),
                                static_cast<std::size_t>(moments.uncertainty.size())));
  }

  const fs::path out = o.out;
  fs::create_directories(out);
  Manifest manifest(out);
  Json j = metrics_to_json(metrics);
  j["config_hash"] = cfg.hash();
  j["mc_samples"] = cfg.mc_samples;
  j["seed"] = seed;
  write_json(out / "metrics.json", j);
  manifest.add("metrics", out / "metrics.json");
  write_predictions_csv(out / "predictions.csv", moments);
  manifest.add("predictions", out / "predictions.csv");
  manifest.set("command", "eval");
  manifest.set("checkpoint", fs::absolute(o.checkpoint).string());
  manifest.write();
  std::printf("accuracy %.4f  ece %.4f", metrics.accuracy, metrics.ece);
  if (metrics.auroc) std::printf("  auroc %.4f", *metrics.auroc);
  std::printf("  (n = %lld)\n", static_cast<long long>(metrics.n_eval));
}

// sweeps --------------------------------------------------------------------

void run_noise(const ExperimentConfig& cfg) {
  cfg.validate();
  const SourceData data = load_source(cfg);
  const auto records = run_noise_sweep(cfg, data);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  Manifest manifest(out);
  write_records(out, "noise_sweep", records, manifest);
  Json curve = noise_curve(records);
  curve["config_hash"] = cfg.hash();
  write_json(out / "noise_curve.json", curve);
  manifest.add("curve", out / "noise_curve.json");
  manifest.set("command", "noise-sweep");
  manifest.set("config", cfg.to_json());
  manifest.set("config_hash", cfg.hash());
  manifest.write();
  for (const auto& r : records) print_record(r);
  std::printf("average accuracy %.4f over %zu rows\n", curve["average_accuracy"].get<double>(),
              records.size());
}

void run_ood(ExperimentConfig cfg, std::optional<Index> n_in, std::optional<Index> n_ood) {
  if (cfg.ood_dir.empty() && !cfg.data_dir.empty() && fs::exists(fs::path(cfg.data_dir) / "ood")) {
    cfg.ood_dir = (fs::path(cfg.data_dir) / "ood").string();
  }
  cfg.validate();
  const SourceData data = load_source(cfg);
  require(!data.ood_views.empty(), ErrorCode::kMissingFile,
          "no OOD set: pass --ood or use the synthetic data");
  ResultRecord record = run_standard(cfg, data, n_in, n_ood);
  record.experiment_id = "ood";
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  Manifest manifest(out);
  write_records(out, "ood", {record}, manifest);
  manifest.set("command", "ood");
  manifest.set("config", cfg.to_json());
  manifest.set("config_hash", cfg.hash());
  manifest.write();
  print_record(record);
}

void run_sweep(const ExperimentConfig& cfg, const std::string& param,
               const std::vector<double>& values) {
  cfg.validate();
  const SweepParam p = parse_sweep_param(param);
  const SourceData data = load_source(cfg);
  const auto records = run_param_sweep(cfg, data, p, values);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  Manifest manifest(out);
  write_records(out, "sweep", records, manifest);
  manifest.set("command", "sweep");
  manifest.set("config", cfg.to_json());
  manifest.set("config_hash", cfg.hash());
  manifest.write();
  for (const auto& r : records) print_record(r);
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::kConfiguration: return kExitConfig;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kNumerical: return kExitNumerical;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view Gaussian process classification with product-of-experts fusion"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the multi-view moons dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--n-per-class", synth.moons.n_per_class)->capture_default_str();
  synth_cmd->add_option("--radii", synth.moons.radii, "One radius per view")
      ->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.moons.noise, "Std of the additive point noise")
      ->capture_default_str();
  synth_cmd->add_option("--ood-count", synth.moons.ood_count)->capture_default_str();
  synth_cmd->add_option("--ood-std", synth.moons.ood_std)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_flag("--views-equal", synth.views_equal,
                      "Use the first radius for every view and no translation");
  bool no_translate = false;
  synth_cmd->add_flag("--no-translate", no_translate, "Keep the overlap view untranslated");

  ExperimentConfig train_cfg;
  CommonOptions train_common;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train one model and write a checkpoint");
  add_data_options(train_cmd, train_cfg, train_common);
  add_model_options(train_cmd, train_cfg, train_common);
  train_cmd->add_option("--seed", train_seed)->capture_default_str();
  train_cmd->add_option("--out", train_cfg.out_dir, "Output directory")->required();

  EvalOptions eval;
  ExperimentConfig eval_cfg;
  CommonOptions eval_common;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint.json")->required();
  eval_cmd->add_option("--test-data", eval.test_data, "Labeled test directory");
  eval_cmd->add_option("--ood", eval.ood, "Unlabeled OOD directory for AUROC");
  eval_cmd->add_option("--seed", eval_seed, "Prediction seed (default: training seed)");
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();
  add_predict_options(eval_cmd, eval_cfg, eval_common);

  ExperimentConfig noise_cfg;
  CommonOptions noise_common;
  std::string noise_mode = "normalize-first";
  auto* noise_cmd = app.add_subcommand("noise-sweep", "Accuracy under Gaussian view noise");
  add_data_options(noise_cmd, noise_cfg, noise_common);
  add_model_options(noise_cmd, noise_cfg, noise_common);
  add_predict_options(noise_cmd, noise_cfg, noise_common);
  noise_cmd->add_option("--mode", noise_mode)
      ->check(CLI::IsMember({"normalize-first", "noise-first"}))
      ->capture_default_str();
  noise_cmd->add_option("--stds", noise_cfg.noise.std_grid, "Noise levels")
      ->delimiter(',')
      ->capture_default_str();
  noise_cmd->add_option("--noisy-views", noise_cfg.noisy_views, "Views per subset (default V/2)");
  noise_cmd->add_option("--seeds", noise_cfg.seeds)->delimiter(',')->capture_default_str();
  noise_cmd->add_option("--out", noise_cfg.out_dir, "Output directory")->required();

  ExperimentConfig ood_cfg;
  CommonOptions ood_common;
  std::optional<Index> n_in;
  std::optional<Index> n_ood;
  auto* ood_cmd = app.add_subcommand("ood", "OOD detection AUROC from summed class variance");
  add_data_options(ood_cmd, ood_cfg, ood_common);
  add_model_options(ood_cmd, ood_cfg, ood_common);
  add_predict_options(ood_cmd, ood_cfg, ood_common);
  ood_cmd->add_option("--ood", ood_cfg.ood_dir, "Unlabeled OOD directory");
  ood_cmd->add_option("--n-in", n_in, "In-domain test points to subsample");
  ood_cmd->add_option("--n-ood", n_ood, "OOD points to subsample");
  ood_cmd->add_option("--seeds", ood_cfg.seeds)->delimiter(',')->capture_default_str();
  ood_cmd->add_option("--out", ood_cfg.out_dir, "Output directory")->required();

  ExperimentConfig sweep_cfg;
  CommonOptions sweep_common;
  std::string sweep_param;
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sensitivity to M, alpha_eps or MC samples");
  add_data_options(sweep_cmd, sweep_cfg, sweep_common);
  add_model_options(sweep_cmd, sweep_cfg, sweep_common);
  add_predict_options(sweep_cmd, sweep_cfg, sweep_common);
  sweep_cmd->add_option("--param", sweep_param, "m, alpha-eps or mc-samples")
      ->required()
      ->check(CLI::IsMember({"m", "alpha-eps", "mc-samples"}));
  sweep_cmd->add_option("--values", sweep_values)->delimiter(',')->required();
  sweep_cmd->add_option("--seeds", sweep_cfg.seeds)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--out", sweep_cfg.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth_cmd) {
      if (no_translate) synth.moons.translate_overlap_view = false;
      run_synth(synth);
    } else if (*train_cmd) {
      apply_common(train_common, train_cfg);
      run_train(train_cfg, train_seed);
    } else if (*eval_cmd) {
      if (eval_cmd->count("--seed")) eval.seed = eval_seed;
      run_eval(eval, *eval_cmd, eval_cfg, eval_common);
    } else if (*noise_cmd) {
      apply_common(noise_common, noise_cfg);
      noise_cfg.noise.mode =
          noise_mode == "noise-first" ? NoiseOrder::kNoiseFirst : NoiseOrder::kNormalizeFirst;
      run_noise(noise_cfg);
    } else if (*ood_cmd) {
      apply_common(ood_common, ood_cfg);
      run_ood(ood_cfg, n_in, n_ood);
    } else if (*sweep_cmd) {
      apply_common(sweep_common, sweep_cfg);
      run_sweep(sweep_cfg, sweep_param, sweep_values);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
