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

#ifndef QMU_DATA_H_
#define QMU_DATA_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qmu {

using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Indices = std::vector<std::size_t>;

struct Dataset {
  std::string name;
  FeatureMatrix X;     // one row per sample
  std::vector<int> y;  // labels in {0, 1, 2}

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {X.row(static_cast<Eigen::Index>(i)).data(),
            static_cast<std::size_t>(X.cols())};
  }
  // Rows `indices` in the given order.
  Dataset Subset(std::span<const std::size_t> indices) const;
};

// ---------------------------------------------------------------------------
// Loading

// Four numeric columns and a species label ("setosa", "Iris-setosa", ...).
Dataset LoadIris(const std::filesystem::path& path, bool has_header = false);

struct CovertypeOptions {
  std::vector<int> selected_classes = {3, 5, 7};  // remapped to 0, 1, 2, ...
  std::size_t per_class_cap = 100;                // 0 keeps every row
  std::uint64_t seed = 0;
  bool has_header = false;
};

// UCI layout: 54 numeric columns followed by an integer cover type label.
// Rows whose label is not selected are dropped. When capped, each class keeps
// the first `per_class_cap` rows met in a seeded shuffle of the file order;
// the kept rows are returned in file order.
Dataset LoadCovertype(const std::filesystem::path& path,
                      const CovertypeOptions& options = {});

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  Eigen::VectorXd mean;
  FeatureMatrix components;            // k x d, orthonormal rows
  Eigen::VectorXd explained_variance;  // k, non-increasing
  Eigen::VectorXd spectrum;            // all d covariance eigenvalues, desc.
};

// Top-k eigenvectors of the sample covariance (n - 1 denominator). Each
// component's sign is fixed so its largest-magnitude entry is positive.
// Throws NumericError if the covariance rank is below k.
PcaModel FitPca(const FeatureMatrix& X, int k = 4);
FeatureMatrix TransformPca(const PcaModel& model, const FeatureMatrix& X);

// ---------------------------------------------------------------------------
// Scaling

struct MinMaxScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  // Maps each column to [0, pi]; values outside the fitted range are clamped.
  FeatureMatrix Transform(const FeatureMatrix& X) const;
};

// Throws NumericError naming the column if any column is constant.
MinMaxScaler FitMinMax(const FeatureMatrix& X);

// ---------------------------------------------------------------------------
// Partitioning

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

inline constexpr SplitSizes kIrisSplit{35, 10, 5};
inline constexpr SplitSizes kCovertypeSplit{60, 10, 30};

struct SplitPartition {
  std::uint64_t seed = 0;
  Indices train;
  Indices val;
  Indices test;
  std::optional<int> forget_class;
  Indices forget;  // train rows labelled forget_class
  Indices anchor;  // train rows with any other label (possibly subsampled)
};

// Stratified per-class split, each index set sorted ascending. Throws
// ConfigError when a class has fewer rows than requested.
SplitPartition Split(const Dataset& dataset, std::uint64_t seed,
                     const SplitSizes& per_class, int num_classes = 3);

// Fills forget/anchor. With anchor_fraction < 1 the anchor set is a
// stratified subsample keeping round(fraction * n_c) (at least 1) rows of
// each retained class c. Throws ConfigError if the forget set is empty.
SplitPartition PartitionForgetAnchor(const SplitPartition& partition,
                                     const Dataset& dataset, int forget_class,
                                     double anchor_fraction = 1.0,
                                     std::uint64_t seed = 0);

// Partition with every forget_class row removed from train, val and test.
SplitPartition WithoutClass(const SplitPartition& partition,
                            const Dataset& dataset, int label);

// Rows of `indices` whose label is / is not `label`.
Indices FilterByLabel(const Dataset& dataset, std::span<const std::size_t> indices,
                      int label, bool keep_matching = true);

nlohmann::json PartitionToJson(const SplitPartition& partition);
SplitPartition PartitionFromJson(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// End-to-end preprocessing

enum class DatasetKind { kIris, kCovertype };

struct DataConfig {
  DatasetKind kind = DatasetKind::kIris;
  std::filesystem::path path;
  bool has_header = false;
  std::uint64_t seed = 0;
  SplitSizes split = kIrisSplit;
  std::size_t covertype_cap = 100;
};

DataConfig DefaultDataConfig(DatasetKind kind);
std::string DatasetName(DatasetKind kind);

struct PreparedData {
  Dataset data;  // 4 scaled features per row
  SplitPartition partition;
  MinMaxScaler scaler;
  std::optional<PcaModel> pca;
};

// Load, split, (Covertype: PCA to 4 dims fit on train rows), then min-max
// scale fit on train rows.
PreparedData Prepare(const DataConfig& config);

// 64-bit FNV-1a, used to tag manifests with a configuration digest.
std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace qmu

#endif  // QMU_DATA_H_
