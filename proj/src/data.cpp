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

#include "mvgp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace mvgp {
namespace fs = std::filesystem;

std::vector<Index> MultiViewDataset::view_dims() const {
  std::vector<Index> dims;
  for (const auto& v : views) dims.push_back(v.cols());
  return dims;
}

void MultiViewDataset::validate() const {
  require(!views.empty(), ErrorCode::kInvalidArgument, "dataset has no views");
  const Index n = views.front().rows();
  for (std::size_t v = 0; v < views.size(); ++v) {
    require(views[v].rows() == n, ErrorCode::kRaggedRows,
            "view " + std::to_string(v) + " has " + std::to_string(views[v].rows()) +
                " rows, view 0 has " + std::to_string(n));
  }
  require(static_cast<Index>(labels.size()) == n, ErrorCode::kRaggedRows,
          std::to_string(labels.size()) + " labels for " + std::to_string(n) + " samples");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_classes, ErrorCode::kLabelOutOfRange,
            "label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                " outside [0, " + std::to_string(num_classes) + ")");
  }
}

MultiViewDataset MultiViewDataset::subset(std::span<const Index> indices) const {
  MultiViewDataset out;
  out.name = name;
  out.num_classes = num_classes;
  out.view_names = view_names;
  const std::vector<Index> idx(indices.begin(), indices.end());
  for (const auto& v : views) out.views.push_back(v(idx, Eigen::all));
  if (!labels.empty()) {
    out.labels.reserve(idx.size());
    for (Index i : idx) out.labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

NormalizationStats NormalizationStats::fit(const MultiViewDataset& train) {
  require(train.size() >= 1, ErrorCode::kEmptyInput, "cannot fit normalization on no rows");
  NormalizationStats stats;
  const double n = static_cast<double>(train.size());
  for (const auto& view : train.views) {
    // Shifting by the first row makes the mean of a constant column exact.
    const Eigen::RowVectorXd pivot = view.row(0);
    const MatrixXd centered0 = view.rowwise() - pivot;
    const Eigen::RowVectorXd mean = pivot + centered0.colwise().sum() / n;
    const MatrixXd centered = view.rowwise() - mean;
    const Eigen::RowVectorXd sd =
        (centered.colwise().squaredNorm() / n).cwiseSqrt().cwiseMax(kStdFloor);
    stats.mean.push_back(mean.transpose());
    stats.stddev.push_back(sd.transpose());
  }
  return stats;
}

MultiViewDataset NormalizationStats::apply(const MultiViewDataset& ds) const {
  require(ds.num_views() == static_cast<Index>(mean.size()), ErrorCode::kDimensionMismatch,
          "normalization fitted on " + std::to_string(mean.size()) + " views, dataset has " +
              std::to_string(ds.num_views()));
  MultiViewDataset out = ds;
  for (std::size_t v = 0; v < mean.size(); ++v) {
    require(ds.views[v].cols() == mean[v].size(), ErrorCode::kDimensionMismatch,
            "feature count mismatch in view " + std::to_string(v));
    out.views[v] = ((ds.views[v].rowwise() - mean[v].transpose()).array().rowwise() /
                    stddev[v].transpose().array())
                       .matrix();
  }
  return out;
}

NoiseSpec NoiseSpec::for_views(Index num_views) {
  NoiseSpec spec;
  spec.noisy_view_count = num_views / 2;
  return spec;
}

void NoiseSpec::validate() const {
  require(!std_grid.empty(), ErrorCode::kInvalidArgument, "noise grid is empty");
  for (std::size_t i = 0; i < std_grid.size(); ++i) {
    require(std_grid[i] > 0.0, ErrorCode::kInvalidArgument, "noise std must be positive");
    require(i == 0 || std_grid[i] > std_grid[i - 1], ErrorCode::kInvalidArgument,
            "noise grid must be strictly ascending");
  }
  require(noisy_view_count >= 0, ErrorCode::kInvalidArgument, "negative noisy view count");
}

Eigen::Vector2d moons_overlap_shift() {
  // Centroids of the two unit half circles: (0, 2/pi) and (1, 1/2 - 2/pi).
  return {-1.0, 4.0 / std::numbers::pi - 0.5};
}

MoonsData make_moons_multiview(const MoonsConfig& config, RngStream& rng) {
  require(config.n_per_class >= 1, ErrorCode::kInvalidArgument, "n_per_class must be >= 1");
  require(!config.radii.empty(), ErrorCode::kInvalidArgument, "need at least one radius");
  require(config.noise >= 0.0 && config.ood_std >= 0.0 && config.ood_count >= 0,
          ErrorCode::kInvalidArgument, "noise levels and counts must be non-negative");

  const Index n = 2 * config.n_per_class;
  MatrixXd base(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    if (i < config.n_per_class) {
      base.row(i) << std::cos(t), std::sin(t);
      labels[static_cast<std::size_t>(i)] = 0;
    } else {
      base.row(i) << 1.0 - std::cos(t), 0.5 - std::sin(t);
      labels[static_cast<std::size_t>(i)] = 1;
    }
  }
  MatrixXd jitter(n, 2);
  for (Index i = 0; i < n; ++i) {
    jitter(i, 0) = config.noise * rng.normal();
    jitter(i, 1) = config.noise * rng.normal();
  }
  // Interleave the classes.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  MatrixXd ood_noise(config.ood_count, 2);
  for (Index i = 0; i < config.ood_count; ++i) {
    ood_noise(i, 0) = config.ood_std * rng.normal();
    ood_noise(i, 1) = config.ood_std * rng.normal();
  }

  MoonsData out;
  out.dataset.name = "moons";
  out.dataset.num_classes = 2;
  const Eigen::Vector2d shift = moons_overlap_shift();
  for (std::size_t v = 0; v < config.radii.size(); ++v) {
    const double r = config.radii[v];
    MatrixXd view = r * base + jitter;
    const bool translated =
        config.translate_overlap_view && static_cast<Index>(v) == config.overlap_view;
    if (translated) {
      out.translation = r * shift;
      for (Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] == 1) view.row(i) += out.translation.transpose();
      }
    }
    out.dataset.views.push_back(view(order, Eigen::all));
    out.dataset.view_names.push_back("view_" + std::to_string(v));
    out.ood_views.push_back(ood_noise.rowwise() + (r * config.ood_center).transpose());
  }
  for (Index i : order) out.dataset.labels.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

TrainTestSplit split(const MultiViewDataset& ds, double train_fraction, RngStream& rng) {
  require(train_fraction > 0.0 && train_fraction < 1.0, ErrorCode::kInvalidArgument,
          "train fraction must lie in (0, 1)");
  const Index n = ds.size();
  require(n >= 2, ErrorCode::kEmptyInput, "need at least two samples to split");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const Index n_train =
      std::clamp<Index>(std::llround(train_fraction * static_cast<double>(n)), 1, n - 1);
  TrainTestSplit out;
  out.train_indices.assign(order.begin(), order.begin() + n_train);
  out.test_indices.assign(order.begin() + n_train, order.end());
  out.train = ds.subset(out.train_indices);
  out.test = ds.subset(out.test_indices);
  return out;
}

NormalizationStats NormalizationStats::identity(const MultiViewDataset& like) {
  NormalizationStats stats;
  for (const auto& view : like.views) {
    stats.mean.push_back(VectorXd::Zero(view.cols()));
    stats.stddev.push_back(VectorXd::Ones(view.cols()));
  }
  return stats;
}

NormalizedPair normalize(const MultiViewDataset& train, const MultiViewDataset& test) {
  NormalizedPair out;
  out.stats = NormalizationStats::fit(train);
  out.train = out.stats.apply(train);
  out.test = out.stats.apply(test);
  return out;
}

MultiViewDataset inject_noise(const MultiViewDataset& ds, std::span<const Index> view_subset,
                              double std, RngStream& rng) {
  require(std >= 0.0, ErrorCode::kInvalidArgument, "noise std must be >= 0");
  MultiViewDataset out = ds;
  if (std == 0.0) return out;
  for (Index v : view_subset) {
    require(v >= 0 && v < ds.num_views(), ErrorCode::kInvalidArgument,
            "noisy view index " + std::to_string(v) + " out of range");
    MatrixXd& view = out.views[static_cast<std::size_t>(v)];
    for (Index j = 0; j < view.cols(); ++j) {
      for (Index i = 0; i < view.rows(); ++i) view(i, j) += std * rng.normal();
    }
  }
  return out;
}

std::vector<std::vector<Index>> noise_view_combinations(Index num_views, Index k) {
  require(k >= 0 && k <= num_views, ErrorCode::kInvalidArgument,
          "need 0 <= k <= V, got k = " + std::to_string(k));
  std::vector<std::vector<Index>> out;
  std::vector<Index> current(static_cast<std::size_t>(k));
  std::iota(current.begin(), current.end(), Index{0});
  while (true) {
    out.push_back(current);
    Index i = k - 1;
    while (i >= 0 && current[static_cast<std::size_t>(i)] == num_views - k + i) --i;
    if (i < 0) break;
    ++current[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::ifstream open_input(const fs::path& path) {
  require(fs::exists(path), ErrorCode::kMissingFile, path.string() + " does not exist");
  std::ifstream in(path);
  require(in.good(), ErrorCode::kMissingFile, "cannot open " + path.string());
  return in;
}

nlohmann::json read_meta(const fs::path& dir) {
  std::ifstream in = open_input(dir / "meta.json");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kNonNumericCell, (dir / "meta.json").string() + ": " + e.what());
  }
}

MatrixXd read_matrix_csv(const fs::path& path, Index expected_rows, Index expected_cols) {
  std::ifstream in = open_input(path);
  MatrixXd out(expected_rows, expected_cols);
  std::string line;
  Index row = 0;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    require(row < expected_rows, ErrorCode::kRaggedRows,
            where + ": more than " + std::to_string(expected_rows) + " rows");
    Index col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = content.find(',', start);
      const std::string_view cell = trim(content.substr(
          start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      require(col < expected_cols, ErrorCode::kRaggedRows,
              where + ": more than " + std::to_string(expected_cols) + " columns");
      double value = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      require(res.ec == std::errc() && res.ptr == cell.data() + cell.size() &&
                  std::isfinite(value),
              ErrorCode::kNonNumericCell,
              where + ": cannot parse '" + std::string(cell) + "' as a number");
      out(row, col++) = value;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    require(col == expected_cols, ErrorCode::kRaggedRows,
            where + ": expected " + std::to_string(expected_cols) + " columns, found " +
                std::to_string(col));
    ++row;
  }
  require(row == expected_rows, ErrorCode::kRaggedRows,
          path.string() + ": expected " + std::to_string(expected_rows) + " rows, found " +
              std::to_string(row));
  return out;
}

std::vector<int> read_labels_csv(const fs::path& path, Index expected_rows, int num_classes) {
  std::ifstream in = open_input(path);
  std::vector<int> labels;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view cell = trim(line);
    if (cell.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    int value = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    require(res.ec == std::errc() && res.ptr == cell.data() + cell.size(),
            ErrorCode::kNonNumericCell, where + ": cannot parse '" + std::string(cell) + "'");
    require(value >= 0 && value < num_classes, ErrorCode::kLabelOutOfRange,
            where + ": label " + std::to_string(value) + " outside [0, " +
                std::to_string(num_classes) + ")");
    labels.push_back(value);
  }
  require(static_cast<Index>(labels.size()) == expected_rows, ErrorCode::kRaggedRows,
          path.string() + ": expected " + std::to_string(expected_rows) + " labels, found " +
              std::to_string(labels.size()));
  return labels;
}

struct MetaShape {
  Index n;
  std::vector<Index> dims;
};

MetaShape meta_shape(const nlohmann::json& meta, const fs::path& dir) {
  try {
    MetaShape shape{meta.at("n").get<Index>(), meta.at("view_dims").get<std::vector<Index>>()};
    const auto num_views = meta.at("num_views").get<std::size_t>();
    require(shape.dims.size() == num_views, ErrorCode::kInvalidArgument,
            (dir / "meta.json").string() + ": view_dims length differs from num_views");
    return shape;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, (dir / "meta.json").string() + ": " + e.what());
  }
}

std::vector<MatrixXd> read_views(const fs::path& dir, const MetaShape& shape) {
  std::vector<MatrixXd> views;
  for (std::size_t v = 0; v < shape.dims.size(); ++v) {
    views.push_back(read_matrix_csv(dir / ("view_" + std::to_string(v) + ".csv"), shape.n,
                                    shape.dims[v]));
  }
  return views;
}

void write_views(const std::vector<MatrixXd>& views, const fs::path& dir) {
  for (std::size_t v = 0; v < views.size(); ++v) {
    std::ofstream out(dir / ("view_" + std::to_string(v) + ".csv"));
    const MatrixXd& m = views[v];
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << format_double(m(i, j));
      }
      out << '\n';
    }
  }
}

}  // namespace

MultiViewDataset load_dataset(const fs::path& dir) {
  const nlohmann::json meta = read_meta(dir);
  const MetaShape shape = meta_shape(meta, dir);
  MultiViewDataset ds;
  ds.name = meta.value("name", dir.filename().string());
  ds.num_classes = meta.at("num_classes").get<int>();
  require(ds.num_classes >= 1, ErrorCode::kInvalidArgument, "num_classes must be >= 1");
  ds.views = read_views(dir, shape);
  ds.labels = read_labels_csv(dir / "labels.csv", shape.n, ds.num_classes);
  if (meta.contains("view_names")) {
    ds.view_names = meta.at("view_names").get<std::vector<std::string>>();
  } else {
    for (std::size_t v = 0; v < ds.views.size(); ++v) ds.view_names.push_back("view_" + std::to_string(v));
  }
  ds.validate();
  return ds;
}

std::vector<MatrixXd> load_unlabeled_views(const fs::path& dir) {
  const nlohmann::json meta = read_meta(dir);
  return read_views(dir, meta_shape(meta, dir));
}

void save_dataset(const MultiViewDataset& ds, const fs::path& dir,
                  const nlohmann::json& extra_meta) {
  ds.validate();
  fs::create_directories(dir);
  nlohmann::json meta = extra_meta;
  meta["name"] = ds.name;
  meta["num_views"] = ds.num_views();
  meta["num_classes"] = ds.num_classes;
  meta["view_dims"] = ds.view_dims();
  meta["n"] = ds.size();
  meta["view_names"] = ds.view_names;
  meta["labeled"] = true;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  write_views(ds.views, dir);
  std::ofstream labels(dir / "labels.csv");
  for (int y : ds.labels) labels << y << '\n';
}

void save_unlabeled_views(const std::vector<MatrixXd>& views, const std::string& name,
                          const fs::path& dir, const nlohmann::json& extra_meta) {
  require(!views.empty(), ErrorCode::kInvalidArgument, "no views to save");
  fs::create_directories(dir);
  nlohmann::json meta = extra_meta;
  meta["name"] = name;
  meta["num_views"] = views.size();
  std::vector<Index> dims;
  for (const auto& v : views) dims.push_back(v.cols());
  meta["view_dims"] = dims;
  meta["n"] = views.front().rows();
  meta["labeled"] = false;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  write_views(views, dir);
}

}  // namespace mvgp
