// Copyright 2026 The QMU Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmu/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <string_view>

#include "qmu/errors.h"

namespace qmu {
namespace {

std::string_view Trim(std::string_view s) {
  const auto not_space = [](char c) {
    return c != ' ' && c != '\t' && c != '\r' && c != '\n';
  };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      break;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

double ParseDouble(std::string_view cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("column " + std::to_string(col + 1) +
                         ": expected a number, got '" + std::string(cell) + "'",
                     row);
  }
  return value;
}

int ParseInt(std::string_view cell, std::size_t row, std::size_t col) {
  int value = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("column " + std::to_string(col + 1) +
                         ": expected an integer label, got '" +
                         std::string(cell) + "'",
                     row);
  }
  return value;
}

// Calls `on_row(row_number, cells)` for every non-blank data line.
template <typename Fn>
void ForEachCsvRow(const std::filesystem::path& path, bool has_header,
                   std::size_t expected_cols, Fn&& on_row) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path.string() + "'");
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (has_header && row == 1) continue;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != expected_cols) {
      throw ParseError("expected " + std::to_string(expected_cols) +
                           " columns, found " + std::to_string(cells.size()),
                       row);
    }
    on_row(row, cells);
  }
}

int IrisLabel(std::string_view name, std::size_t row) {
  if (name.starts_with("Iris-")) name.remove_prefix(5);
  if (name == "setosa") return 0;
  if (name == "versicolor") return 1;
  if (name == "virginica") return 2;
  throw ParseError("unknown iris species '" + std::string(name) + "'", row);
}

FeatureMatrix RowsToMatrix(const std::vector<std::vector<double>>& rows,
                           std::size_t cols) {
  FeatureMatrix X(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return X;
}

FeatureMatrix SelectRows(const FeatureMatrix& X,
                         std::span<const std::size_t> indices) {
  FeatureMatrix out(static_cast<Eigen::Index>(indices.size()), X.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        X.row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

}  // namespace

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name = name;
  out.X = SelectRows(X, indices);
  out.y.reserve(indices.size());
  for (std::size_t i : indices) out.y.push_back(y.at(i));
  return out;
}

Dataset LoadIris(const std::filesystem::path& path, bool has_header) {
  std::vector<std::vector<double>> rows;
  Dataset out;
  out.name = "iris";
  ForEachCsvRow(path, has_header, 5, [&](std::size_t row, const auto& cells) {
    std::vector<double> features(4);
    for (std::size_t j = 0; j < 4; ++j) {
      features[j] = ParseDouble(cells[j], row, j);
    }
    out.y.push_back(IrisLabel(cells[4], row));
    rows.push_back(std::move(features));
  });
  out.X = RowsToMatrix(rows, 4);
  return out;
}

Dataset LoadCovertype(const std::filesystem::path& path,
                      const CovertypeOptions& options) {
  constexpr std::size_t kCols = 54;
  std::map<int, int> remap;
  for (std::size_t i = 0; i < options.selected_classes.size(); ++i) {
    remap[options.selected_classes[i]] = static_cast<int>(i);
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  ForEachCsvRow(path, options.has_header, kCols + 1,
                [&](std::size_t row, const auto& cells) {
                  const int label = ParseInt(cells[kCols], row, kCols);
                  const auto it = remap.find(label);
                  if (it == remap.end()) return;
                  std::vector<double> features(kCols);
                  for (std::size_t j = 0; j < kCols; ++j) {
                    features[j] = ParseDouble(cells[j], row, j);
                  }
                  rows.push_back(std::move(features));
                  labels.push_back(it->second);
                });

  Indices keep(rows.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  if (options.per_class_cap > 0) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(keep.begin(), keep.end(), rng);
    std::map<int, std::size_t> taken;
    Indices capped;
    for (std::size_t i : keep) {
      if (taken[labels[i]]++ < options.per_class_cap) capped.push_back(i);
    }
    std::sort(capped.begin(), capped.end());
    keep = std::move(capped);
  }

  Dataset out;
  out.name = "covertype";
  out.X.resize(static_cast<Eigen::Index>(keep.size()), kCols);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < kCols; ++j) {
      out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[keep[i]][j];
    }
    out.y.push_back(labels[keep[i]]);
  }
  return out;
}

PcaModel FitPca(const FeatureMatrix& X, int k) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (k < 1 || k > d) {
    throw std::invalid_argument("PCA dimension " + std::to_string(k) +
                                " out of range");
  }
  if (n <= k) {
    throw NumericError("PCA needs more than " + std::to_string(k) +
                       " rows, got " + std::to_string(n));
  }
  PcaModel model;
  model.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues.
  model.spectrum = solver.eigenvalues().reverse();
  const double top = std::max(model.spectrum(0), 0.0);
  const double tol = std::max(top, 1.0) * 1e-12 * static_cast<double>(d);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (model.spectrum(i) > tol) ++rank;
  }
  if (rank < k) {
    throw NumericError("covariance rank " + std::to_string(rank) +
                       " is below the requested " + std::to_string(k) +
                       " components");
  }

  model.components.resize(k, d);
  model.explained_variance.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v(peak) < 0) v = -v;
    model.components.row(c) = v.transpose();
    model.explained_variance(c) = model.spectrum(c);
  }
  return model;
}

FeatureMatrix TransformPca(const PcaModel& model, const FeatureMatrix& X) {
  if (X.cols() != model.mean.size()) {
    throw std::invalid_argument("PCA input has " + std::to_string(X.cols()) +
                                " columns, model expects " +
                                std::to_string(model.mean.size()));
  }
  const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();
  return centered * model.components.transpose();
}

MinMaxScaler FitMinMax(const FeatureMatrix& X) {
  if (X.rows() == 0) throw NumericError("cannot fit scaler on zero rows");
  MinMaxScaler scaler;
  scaler.min = X.colwise().minCoeff().transpose();
  scaler.max = X.colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (!(scaler.max(j) > scaler.min(j))) {
      throw NumericError("column " + std::to_string(j) +
                         " is constant; min-max scaling is undefined");
    }
  }
  return scaler;
}

FeatureMatrix MinMaxScaler::Transform(const FeatureMatrix& X) const {
  if (X.cols() != min.size()) {
    throw std::invalid_argument("scaler input column count mismatch");
  }
  FeatureMatrix out(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double scaled =
          std::numbers::pi * (X(i, j) - min(j)) / (max(j) - min(j));
      out(i, j) = std::clamp(scaled, 0.0, std::numbers::pi);
    }
  }
  return out;
}

SplitPartition Split(const Dataset& dataset, std::uint64_t seed,
                     const SplitSizes& per_class, int num_classes) {
  std::mt19937_64 rng(seed);
  SplitPartition out;
  out.seed = seed;
  const std::size_t need = per_class.train + per_class.val + per_class.test;
  for (int c = 0; c < num_classes; ++c) {
    Indices rows;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.y[i] == c) rows.push_back(i);
    }
    if (rows.size() < need) {
      throw ConfigError("class " + std::to_string(c) + " has " +
                        std::to_string(rows.size()) + " samples, split needs " +
                        std::to_string(need) + " (" +
                        std::to_string(per_class.train) + "/" +
                        std::to_string(per_class.val) + "/" +
                        std::to_string(per_class.test) + ")");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    auto it = rows.begin();
    out.train.insert(out.train.end(), it, it + per_class.train);
    it += per_class.train;
    out.val.insert(out.val.end(), it, it + per_class.val);
    it += per_class.val;
    out.test.insert(out.test.end(), it, it + per_class.test);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Indices FilterByLabel(const Dataset& dataset,
                      std::span<const std::size_t> indices, int label,
                      bool keep_matching) {
  Indices out;
  for (std::size_t i : indices) {
    if ((dataset.y.at(i) == label) == keep_matching) out.push_back(i);
  }
  return out;
}

SplitPartition PartitionForgetAnchor(const SplitPartition& partition,
                                     const Dataset& dataset, int forget_class,
                                     double anchor_fraction,
                                     std::uint64_t seed) {
  if (forget_class < 0 || forget_class > 2) {
    throw ConfigError("forget class must be 0, 1 or 2, got " +
                      std::to_string(forget_class));
  }
  if (!(anchor_fraction > 0.0 && anchor_fraction <= 1.0)) {
    throw ConfigError("anchor fraction must be in (0, 1]");
  }
  SplitPartition out = partition;
  out.forget_class = forget_class;
  out.forget = FilterByLabel(dataset, partition.train, forget_class);
  if (out.forget.empty()) {
    throw ConfigError("forget set is empty: no training rows with label " +
                      std::to_string(forget_class));
  }
  out.anchor = FilterByLabel(dataset, partition.train, forget_class, false);
  if (anchor_fraction < 1.0) {
    std::mt19937_64 rng(seed);
    std::map<int, Indices> by_class;
    for (std::size_t i : out.anchor) by_class[dataset.y[i]].push_back(i);
    Indices kept;
    for (auto& [label, rows] : by_class) {
      const auto n = static_cast<std::size_t>(std::max<long>(
          1, std::lround(anchor_fraction * static_cast<double>(rows.size()))));
      std::shuffle(rows.begin(), rows.end(), rng);
      kept.insert(kept.end(), rows.begin(), rows.begin() + n);
    }
    std::sort(kept.begin(), kept.end());
    out.anchor = std::move(kept);
  }
  return out;
}

SplitPartition WithoutClass(const SplitPartition& partition,
                            const Dataset& dataset, int label) {
  SplitPartition out = partition;
  out.train = FilterByLabel(dataset, partition.train, label, false);
  out.val = FilterByLabel(dataset, partition.val, label, false);
  out.test = FilterByLabel(dataset, partition.test, label, false);
  out.forget.clear();
  out.anchor = out.train;
  out.forget_class = label;
  return out;
}

nlohmann::json PartitionToJson(const SplitPartition& partition) {
  nlohmann::json j;
  j["seed"] = partition.seed;
  j["train"] = partition.train;
  j["val"] = partition.val;
  j["test"] = partition.test;
  j["forget_class"] = partition.forget_class ? nlohmann::json(*partition.forget_class)
                                             : nlohmann::json(nullptr);
  j["forget"] = partition.forget;
  j["anchor"] = partition.anchor;
  return j;
}

SplitPartition PartitionFromJson(const nlohmann::json& j) {
  try {
    SplitPartition out;
    out.seed = j.at("seed").get<std::uint64_t>();
    out.train = j.at("train").get<Indices>();
    out.val = j.at("val").get<Indices>();
    out.test = j.at("test").get<Indices>();
    if (!j.at("forget_class").is_null()) {
      out.forget_class = j.at("forget_class").get<int>();
    }
    out.forget = j.at("forget").get<Indices>();
    out.anchor = j.at("anchor").get<Indices>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed partition manifest: ") + e.what());
  }
}

DataConfig DefaultDataConfig(DatasetKind kind) {
  DataConfig config;
  config.kind = kind;
  if (kind == DatasetKind::kIris) {
    config.path = "data/iris.csv";
    config.split = kIrisSplit;
  } else {
    config.path = "data/covtype.data";
    config.split = kCovertypeSplit;
  }
  return config;
}

std::string DatasetName(DatasetKind kind) {
  return kind == DatasetKind::kIris ? "iris" : "covertype";
}

PreparedData Prepare(const DataConfig& config) {
  Dataset raw;
  if (config.kind == DatasetKind::kIris) {
    raw = LoadIris(config.path, config.has_header);
  } else {
    CovertypeOptions options;
    options.per_class_cap = config.covertype_cap;
    options.seed = config.seed;
    options.has_header = config.has_header;
    raw = LoadCovertype(config.path, options);
  }

  PreparedData out;
  out.partition = Split(raw, config.seed, config.split);
  const FeatureMatrix train_raw = SelectRows(raw.X, out.partition.train);

  FeatureMatrix reduced = raw.X;
  FeatureMatrix train_reduced = train_raw;
  if (config.kind == DatasetKind::kCovertype) {
    out.pca = FitPca(train_raw, 4);
    reduced = TransformPca(*out.pca, raw.X);
    train_reduced = TransformPca(*out.pca, train_raw);
  }
  out.scaler = FitMinMax(train_reduced);
  out.data.name = raw.name;
  out.data.X = out.scaler.Transform(reduced);
  out.data.y = raw.y;
  return out;
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace qmu
