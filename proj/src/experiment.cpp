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

#include "mvgp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace mvgp {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* noise_order_name(NoiseOrder order) {
  return order == NoiseOrder::kNormalizeFirst ? "normalize_first" : "noise_first";
}

NoiseOrder parse_noise_order(const std::string& s) {
  if (s == "normalize_first" || s == "normalize-first") return NoiseOrder::kNormalizeFirst;
  if (s == "noise_first" || s == "noise-first") return NoiseOrder::kNoiseFirst;
  throw Error(ErrorCode::kInvalidArgument, "unknown noise order '" + s + "'");
}

Json moons_to_json(const MoonsConfig& m) {
  return Json{{"n_per_class", m.n_per_class},
              {"radii", m.radii},
              {"noise", m.noise},
              {"ood_count", m.ood_count},
              {"ood_std", m.ood_std},
              {"overlap_view", m.overlap_view},
              {"translate_overlap_view", m.translate_overlap_view},
              {"ood_center", {m.ood_center.x(), m.ood_center.y()}}};
}

MoonsConfig moons_from_json(const Json& j) {
  MoonsConfig m;
  m.n_per_class = j.at("n_per_class").get<Index>();
  m.radii = j.at("radii").get<std::vector<double>>();
  m.noise = j.at("noise").get<double>();
  m.ood_count = j.at("ood_count").get<Index>();
  m.ood_std = j.at("ood_std").get<double>();
  m.overlap_view = j.at("overlap_view").get<Index>();
  m.translate_overlap_view = j.at("translate_overlap_view").get<bool>();
  const auto c = j.at("ood_center").get<std::vector<double>>();
  require(c.size() == 2, ErrorCode::kInvalidArgument, "ood_center needs two coordinates");
  m.ood_center = {c[0], c[1]};
  return m;
}

std::vector<Index> subsample(Index n, Index k, RngStream& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  k = std::min(k, n);
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

std::vector<MatrixXd> take_rows(const std::vector<MatrixXd>& views, const std::vector<Index>& rows) {
  std::vector<MatrixXd> out;
  for (const auto& v : views) out.push_back(v(rows, Eigen::all));
  return out;
}

std::vector<MatrixXd> normalize_views(const NormalizationStats& stats,
                                      const std::vector<MatrixXd>& views) {
  MultiViewDataset tmp;
  tmp.views = views;
  return stats.apply(tmp).views;
}

Index resolve_noisy_views(const ExperimentConfig& cfg, Index num_views) {
  return cfg.noisy_views < 0 ? num_views / 2 : cfg.noisy_views;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(num_inducing >= 1, ErrorCode::kInvalidArgument, "num_inducing must be >= 1");
  require(alpha_eps > 0.0 && std::isfinite(alpha_eps), ErrorCode::kInvalidAlphaEps,
          "alpha_eps must be positive");
  require(mc_samples >= 1, ErrorCode::kInvalidArgument, "mc_samples must be >= 1");
  require(!seeds.empty(), ErrorCode::kInvalidArgument, "need at least one seed");
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::kInvalidArgument,
          "train fraction must lie in (0, 1)");
  require(ece_bins >= 1, ErrorCode::kInvalidArgument, "ece_bins must be >= 1");
  policy.validate();
  train.validate();
  noise.validate();
  if (!data_dir.empty()) {
    require(std::filesystem::exists(data_dir), ErrorCode::kMissingFile,
            data_dir + " does not exist");
  }
  if (!ood_dir.empty()) {
    require(std::filesystem::exists(ood_dir), ErrorCode::kMissingFile,
            ood_dir + " does not exist");
  }
}

Json ExperimentConfig::to_json() const {
  Json data = data_dir.empty()
                  ? Json{{"synthetic", moons_to_json(synth)}, {"synth_seed", synth_seed}}
                  : Json{{"dir", data_dir}};
  const auto& s = train.schedule;
  return Json{
      {"data", std::move(data)},
      {"ood_dir", ood_dir},
      {"normalize", normalizes()},
      {"num_inducing", num_inducing},
      {"alpha_eps", alpha_eps},
      {"covariance", covariance == CovarianceForm::kFull ? "full" : "diagonal"},
      {"ard", ard},
      {"mc_samples", mc_samples},
      {"policy",
       {{"mode", policy.mode == WeightMode::kUniform ? "uniform" : "negentropy_softmax"},
        {"temperature", policy.temperature}}},
      {"train",
       {{"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"schedule",
         {{"warmup_epochs", s.warmup_epochs},
          {"lr_start", s.lr_start},
          {"lr_end", s.lr_end},
          {"lr_main", s.lr_main}}},
        {"beta", train.beta},
        {"adam", {{"beta1", train.adam.beta1}, {"beta2", train.adam.beta2}, {"eps", train.adam.eps}}},
        {"train_kernel", train.train_kernel},
        {"train_inducing", train.train_inducing},
        {"base_jitter", train.svgp.base_jitter},
        {"inducing_jitter", train.svgp.inducing_jitter},
        {"variance_floor", train.svgp.variance_floor}}},
      {"noise",
       {{"std_grid", noise.std_grid},
        {"mode", noise_order_name(noise.mode)},
        {"noisy_views", noisy_views}}},
      {"seeds", seeds},
      {"train_fraction", train_fraction},
      {"ece_bins", ece_bins},
  };
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  try {
    ExperimentConfig cfg;
    const Json& data = j.at("data");
    if (data.contains("dir")) {
      cfg.data_dir = data.at("dir").get<std::string>();
    } else {
      cfg.synth = moons_from_json(data.at("synthetic"));
      cfg.synth_seed = data.at("synth_seed").get<std::uint64_t>();
    }
    cfg.ood_dir = j.at("ood_dir").get<std::string>();
    cfg.normalize = j.at("normalize").get<bool>();
    cfg.num_inducing = j.at("num_inducing").get<Index>();
    cfg.alpha_eps = j.at("alpha_eps").get<double>();
    cfg.covariance = j.at("covariance").get<std::string>() == "full" ? CovarianceForm::kFull
                                                                      : CovarianceForm::kDiagonal;
    cfg.ard = j.at("ard").get<bool>();
    cfg.mc_samples = j.at("mc_samples").get<Index>();
    cfg.policy.mode = j.at("policy").at("mode").get<std::string>() == "uniform"
                          ? WeightMode::kUniform
                          : WeightMode::kNegentropySoftmax;
    cfg.policy.temperature = j.at("policy").at("temperature").get<double>();
    const Json& t = j.at("train");
    cfg.train.epochs = t.at("epochs").get<Index>();
    cfg.train.batch_size = t.at("batch_size").get<Index>();
    const Json& s = t.at("schedule");
    cfg.train.schedule.warmup_epochs = s.at("warmup_epochs").get<Index>();
    cfg.train.schedule.lr_start = s.at("lr_start").get<double>();
    cfg.train.schedule.lr_end = s.at("lr_end").get<double>();
    cfg.train.schedule.lr_main = s.at("lr_main").get<double>();
    cfg.train.beta = t.at("beta").get<double>();
    cfg.train.adam.beta1 = t.at("adam").at("beta1").get<double>();
    cfg.train.adam.beta2 = t.at("adam").at("beta2").get<double>();
    cfg.train.adam.eps = t.at("adam").at("eps").get<double>();
    cfg.train.train_kernel = t.at("train_kernel").get<bool>();
    cfg.train.train_inducing = t.at("train_inducing").get<bool>();
    cfg.train.svgp.base_jitter = t.at("base_jitter").get<double>();
    cfg.train.svgp.inducing_jitter = t.at("inducing_jitter").get<double>();
    cfg.train.svgp.variance_floor = t.at("variance_floor").get<double>();
    const Json& n = j.at("noise");
    cfg.noise.std_grid = n.at("std_grid").get<std::vector<double>>();
    cfg.noise.mode = parse_noise_order(n.at("mode").get<std::string>());
    cfg.noisy_views = n.at("noisy_views").get<Index>();
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.train_fraction = j.at("train_fraction").get<double>();
    cfg.ece_bins = j.at("ece_bins").get<int>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed config: ") + e.what());
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

RngStream seed_stream(std::uint64_t seed, SeedStream stream) {
  return RngStream(seed, static_cast<std::uint64_t>(stream));
}

SourceData load_source(const ExperimentConfig& cfg) {
  SourceData out;
  if (cfg.data_dir.empty()) {
    RngStream rng = seed_stream(cfg.synth_seed, SeedStream::kSynth);
    MoonsData moons = make_moons_multiview(cfg.synth, rng);
    out.dataset = std::move(moons.dataset);
    out.ood_views = std::move(moons.ood_views);
    out.provenance = Json{{"synthetic", moons_to_json(cfg.synth)},
                          {"synth_seed", cfg.synth_seed},
                          {"translation", {moons.translation.x(), moons.translation.y()}}};
  } else {
    out.dataset = load_dataset(cfg.data_dir);
    out.provenance = Json{{"dir", cfg.data_dir}};
  }
  if (!cfg.ood_dir.empty()) {
    out.ood_views = load_unlabeled_views(cfg.ood_dir);
    require(static_cast<Index>(out.ood_views.size()) == out.dataset.num_views(),
            ErrorCode::kDimensionMismatch, "OOD set has a different number of views");
    out.provenance["ood_dir"] = cfg.ood_dir;
  }
  return out;
}

PreparedSplit prepare_split(const MultiViewDataset& ds, double train_fraction,
                            std::uint64_t seed, bool normalize) {
  RngStream rng = seed_stream(seed, SeedStream::kSplit);
  PreparedSplit out;
  out.split = split(ds, train_fraction, rng);
  if (normalize) {
    out.normalized = mvgp::normalize(out.split.train, out.split.test);
  } else {
    out.normalized = {out.split.train, out.split.test,
                      NormalizationStats::identity(out.split.train)};
  }
  return out;
}

Model fit_model(const MultiViewDataset& normalized_train, const NormalizationStats& stats,
                const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto start = Clock::now();
  Model model;
  model.stats = stats;
  model.num_classes = normalized_train.num_classes;
  model.alpha_eps = cfg.alpha_eps;
  const auto labels =
      transform_labels(normalized_train.labels, normalized_train.num_classes, cfg.alpha_eps);
  for (const auto& view : normalized_train.views) {
    model.experts.push_back(init_expert(view, cfg.num_inducing, model.num_classes,
                                        cfg.covariance, cfg.ard, cfg.train.svgp));
  }
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  model.report = train(normalized_train, labels, model.experts, tc);
  model.train_seconds = seconds_since(start);
  return model;
}

DirichletMoments predict_model(const Model& model, const std::vector<MatrixXd>& views,
                               const ExperimentConfig& cfg, std::uint64_t seed,
                               std::uint64_t stream_salt) {
  const RngStream rng = seed_stream(seed, SeedStream::kPredict).derive(stream_salt);
  return predict(model.experts, views, cfg.policy, cfg.mc_samples, rng, cfg.train.svgp);
}

Json checkpoint_to_json(const Model& model, const ExperimentConfig& cfg, std::uint64_t seed) {
  Json experts = Json::array();
  for (const auto& e : model.experts) experts.push_back(expert_to_json(e));
  return Json{{"format", "mvgp-checkpoint"},
              {"version", 1},
              {"config", cfg.to_json()},
              {"config_hash", cfg.hash()},
              {"seed", seed},
              {"num_classes", model.num_classes},
              {"alpha_eps", model.alpha_eps},
              {"normalization", stats_to_json(model.stats)},
              {"experts", std::move(experts)}};
}

Model model_from_checkpoint(const Json& j) {
  try {
    require(j.value("format", "") == "mvgp-checkpoint", ErrorCode::kInvalidArgument,
            "not a checkpoint file");
    Model model;
    model.num_classes = j.at("num_classes").get<int>();
    model.alpha_eps = j.at("alpha_eps").get<double>();
    model.stats = stats_from_json(j.at("normalization"));
    for (const auto& e : j.at("experts")) model.experts.push_back(expert_from_json(e));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed checkpoint: ") + e.what());
  }
}

std::pair<double, double> ResultRecord::summary(const std::string& metric) const {
  std::vector<double> xs;
  for (const auto& r : per_seed) {
    if (metric == "accuracy") xs.push_back(r.metrics.accuracy);
    else if (metric == "ece") xs.push_back(r.metrics.ece);
    else if (metric == "auroc" && r.metrics.auroc) xs.push_back(*r.metrics.auroc);
  }
  if (xs.empty()) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

Json ResultRecord::to_json(bool include_timing) const {
  Json seeds = Json::array();
  double train_s = 0.0;
  double test_s = 0.0;
  for (const auto& r : per_seed) {
    Json s = metrics_to_json(r.metrics);
    s["seed"] = r.seed;
    s["mean_uncertainty_in"] = r.mean_uncertainty_in;
    if (r.mean_uncertainty_ood) s["mean_uncertainty_ood"] = *r.mean_uncertainty_ood;
    if (include_timing) {
      s["timing"] = {{"train_seconds", r.train_seconds}, {"test_seconds", r.test_seconds}};
    }
    train_s += r.train_seconds;
    test_s += r.test_seconds;
    seeds.push_back(std::move(s));
  }
  Json mean = Json::object();
  Json sd = Json::object();
  for (const char* metric : {"accuracy", "ece", "auroc"}) {
    const auto [m, s] = summary(metric);
    if (std::isnan(m)) continue;
    mean[metric] = m;
    sd[metric] = s;
  }
  Json j{{"experiment_id", experiment_id},
         {"config_hash", config_hash},
         {"params", params},
         {"per_seed", std::move(seeds)},
         {"mean", std::move(mean)},
         {"std", std::move(sd)}};
  if (include_timing && !per_seed.empty()) {
    const double n = static_cast<double>(per_seed.size());
    j["timing"] = {{"train_seconds_mean", train_s / n}, {"test_seconds_mean", test_s / n}};
  }
  return j;
}

namespace {

SeedResult evaluate_seed(const Model& model, const PreparedSplit& prep, const SourceData& data,
                         const ExperimentConfig& cfg, std::uint64_t seed,
                         std::optional<Index> n_in, std::optional<Index> n_ood) {
  SeedResult result;
  result.seed = seed;
  result.train_seconds = model.train_seconds;
  const auto start = Clock::now();
  RngStream sub = seed_stream(seed, SeedStream::kSubsample);

  const MultiViewDataset& test = prep.normalized.test;
  std::vector<MatrixXd> test_views = test.views;
  std::vector<int> test_labels = test.labels;
  if (n_in) {
    const auto rows = subsample(test.size(), *n_in, sub);
    test_views = take_rows(test.views, rows);
    test_labels.clear();
    for (Index i : rows) test_labels.push_back(test.labels[static_cast<std::size_t>(i)]);
  }
  const DirichletMoments in = predict_model(model, test_views, cfg, seed, 0);
  result.metrics = evaluate(in, test_labels, cfg.ece_bins);
  result.mean_uncertainty_in = in.uncertainty.mean();

  if (!data.ood_views.empty()) {
    std::vector<MatrixXd> ood = normalize_views(model.stats, data.ood_views);
    if (n_ood) ood = take_rows(ood, subsample(ood.front().rows(), *n_ood, sub));
    const DirichletMoments out = predict_model(model, ood, cfg, seed, 1);
    result.mean_uncertainty_ood = out.uncertainty.mean();
    result.metrics.auroc =
        auroc(std::span<const double>(out.uncertainty.data(),
                                      static_cast<std::size_t>(out.uncertainty.size())),
              std::span<const double>(in.uncertainty.data(),
                                      static_cast<std::size_t>(in.uncertainty.size())));
  }
  result.test_seconds = seconds_since(start);
  return result;
}

std::string join(const std::vector<Index>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace

ResultRecord run_standard(const ExperimentConfig& cfg, const SourceData& data,
                          std::optional<Index> n_in, std::optional<Index> n_ood) {
  cfg.validate();
  ResultRecord record;
  record.experiment_id = "standard";
  record.config_hash = cfg.hash();
  if (n_in) record.params["n_in"] = *n_in;
  if (n_ood) record.params["n_ood"] = *n_ood;
  for (std::uint64_t seed : cfg.seeds) {
    const PreparedSplit prep = prepare_split(data.dataset, cfg.train_fraction, seed, cfg.normalizes());
    const Model model = fit_model(prep.normalized.train, prep.normalized.stats, cfg, seed);
    record.per_seed.push_back(evaluate_seed(model, prep, data, cfg, seed, n_in, n_ood));
  }
  return record;
}

std::vector<ResultRecord> run_noise_sweep(const ExperimentConfig& cfg, const SourceData& data) {
  cfg.validate();
  const Index v_count = data.dataset.num_views();
  const Index k = resolve_noisy_views(cfg, v_count);
  const auto subsets = noise_view_combinations(v_count, k);
  const auto& grid = cfg.noise.std_grid;

  std::vector<ResultRecord> records;
  for (double std : grid) {
    for (const auto& subset : subsets) {
      ResultRecord r;
      r.experiment_id = "noise/std=" + format_double(std) + "/views=" + join(subset);
      r.config_hash = cfg.hash();
      r.params = {{"std", std},
                  {"noisy_views", subset},
                  {"mode", noise_order_name(cfg.noise.mode)}};
      records.push_back(std::move(r));
    }
  }
  for (std::uint64_t seed : cfg.seeds) {
    const PreparedSplit prep = prepare_split(data.dataset, cfg.train_fraction, seed, cfg.normalizes());
    const Model model = fit_model(prep.normalized.train, prep.normalized.stats, cfg, seed);
    const RngStream noise_root = seed_stream(seed, SeedStream::kNoise);
    std::size_t cell = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (std::size_t s = 0; s < subsets.size(); ++s, ++cell) {
        const auto start = Clock::now();
        RngStream rng = noise_root.derive(g).derive(s);
        MultiViewDataset noisy;
        if (cfg.noise.mode == NoiseOrder::kNormalizeFirst) {
          noisy = inject_noise(prep.normalized.test, subsets[s], grid[g], rng);
        } else {
          noisy = model.stats.apply(inject_noise(prep.split.test, subsets[s], grid[g], rng));
        }
        const DirichletMoments m = predict_model(model, noisy.views, cfg, seed, 2 + cell);
        SeedResult result;
        result.seed = seed;
        result.metrics = evaluate(m, noisy.labels, cfg.ece_bins);
        result.mean_uncertainty_in = m.uncertainty.mean();
        result.train_seconds = model.train_seconds;
        result.test_seconds = seconds_since(start);
        records[cell].per_seed.push_back(result);
      }
    }
  }
  return records;
}

Json noise_curve(const std::vector<ResultRecord>& records) {
  std::vector<double> stds;
  std::vector<std::vector<double>> accs;
  double total = 0.0;
  for (const auto& r : records) {
    const double std = r.params.at("std").get<double>();
    if (stds.empty() || stds.back() != std) {
      stds.push_back(std);
      accs.emplace_back();
    }
    const double acc = r.summary("accuracy").first;
    accs.back().push_back(acc);
    total += acc;
  }
  Json curve = Json::array();
  for (std::size_t i = 0; i < stds.size(); ++i) {
    const double mean =
        std::accumulate(accs[i].begin(), accs[i].end(), 0.0) / static_cast<double>(accs[i].size());
    curve.push_back({{"std", stds[i]}, {"mean_accuracy", mean}, {"subsets", accs[i].size()}});
  }
  return Json{{"curve", std::move(curve)},
              {"average_accuracy", records.empty() ? 0.0 : total / static_cast<double>(records.size())},
              {"rows", records.size()}};
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "m") return SweepParam::kInducing;
  if (name == "alpha-eps" || name == "alpha_eps") return SweepParam::kAlphaEps;
  if (name == "mc-samples" || name == "mc_samples") return SweepParam::kMcSamples;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown sweep parameter '" + name + "' (m, alpha-eps, mc-samples)");
}

std::vector<ResultRecord> run_param_sweep(const ExperimentConfig& cfg, const SourceData& data,
                                          SweepParam param, const std::vector<double>& values) {
  cfg.validate();
  require(!values.empty(), ErrorCode::kInvalidArgument, "sweep needs at least one value");
  const char* name = param == SweepParam::kInducing   ? "m"
                     : param == SweepParam::kAlphaEps ? "alpha_eps"
                                                      : "mc_samples";
  auto with_value = [&](double v) {
    ExperimentConfig c = cfg;
    if (param == SweepParam::kInducing || param == SweepParam::kMcSamples) {
      require(v >= 1.0 && v == std::floor(v), ErrorCode::kInvalidArgument,
              std::string(name) + " values must be positive integers");
    }
    if (param == SweepParam::kInducing) c.num_inducing = static_cast<Index>(v);
    if (param == SweepParam::kAlphaEps) c.alpha_eps = v;
    if (param == SweepParam::kMcSamples) c.mc_samples = static_cast<Index>(v);
    c.validate();
    return c;
  };

  std::vector<ResultRecord> records;
  for (double v : values) {
    const ExperimentConfig c = with_value(v);
    ResultRecord r;
    r.experiment_id = std::string("sweep/") + name + "=" + format_double(v);
    r.config_hash = c.hash();
    r.params = {{"param", name}, {"value", v}};
    records.push_back(std::move(r));
  }
  if (param != SweepParam::kMcSamples) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      records[i].per_seed = run_standard(with_value(values[i]), data).per_seed;
    }
    return records;
  }
  // The model does not depend on S; train once per seed.
  for (std::uint64_t seed : cfg.seeds) {
    const PreparedSplit prep = prepare_split(data.dataset, cfg.train_fraction, seed, cfg.normalizes());
    const Model model = fit_model(prep.normalized.train, prep.normalized.stats, cfg, seed);
    for (std::size_t i = 0; i < values.size(); ++i) {
      records[i].per_seed.push_back(
          evaluate_seed(model, prep, data, with_value(values[i]), seed, std::nullopt,
                        std::nullopt));
    }
  }
  return records;
}

Json without_timing(const Json& j) {
  if (j.is_object()) {
    Json out = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "timing" || (key.size() >= 8 && key.ends_with("_seconds"))) continue;
      out[key] = without_timing(it.value());
    }
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& x : j) out.push_back(without_timing(x));
    return out;
  }
  return j;
}

}  // namespace mvgp
