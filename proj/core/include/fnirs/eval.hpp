// Copyright 2026 The fnirs-stress Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnirs/features.hpp"
#include "fnirs/nn.hpp"
#include "fnirs/synth.hpp"

namespace fnirs::eval {

/// Assignment of every sample to one of k test folds.
struct FoldPlan {
    std::size_t k = 5;
    std::uint64_t seed = 0;
    bool grouped = false;
    std::vector<std::size_t> assignments;  // fold index per sample

    std::size_t size() const { return assignments.size(); }
    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
    std::vector<std::size_t> fold_sizes() const;
};

/// Seeded permutation of 0..n-1 cut into k contiguous chunks; the first
/// n % k folds get one extra sample.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Same cut applied to the distinct groups, so a group never straddles
/// train and test.
FoldPlan group_kfold_split(std::span<const std::string> groups, std::size_t k, std::uint64_t seed);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population
};

Summary aggregate(std::span<const double> values);

/// "88.52 ± 0.77"
std::string mean_pm_std(const Summary& summary, int decimals = 2);

struct HarnessConfig {
    std::size_t k = 5;
    std::uint64_t seed = 0;  // fold assignment and subsampling
    bool group_stratified = false;
    bool standardize = true;  // z-score on each training split
    std::vector<double> fractions{1.0, 0.8, 0.6, 0.4, 0.2};
    nn::NetworkSpec network;
    nn::TrainConfig train;  // train.seed is the root of per-fold model seeds
    unsigned threads = 1;

    void validate() const;
};

struct FoldResult {
    std::size_t fold = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double accuracy = 0.0;  // percent
    std::string test_digest;
    std::vector<double> loss_curve;
};

struct AblationRow {
    std::string key;
    Summary summary;
    std::vector<double> per_fold_accuracy;
    std::optional<double> reference;  // reference accuracy, for context only
};

struct AblationTable {
    std::string name;  // "timeframe", "featureset", "fraction"
    std::vector<AblationRow> rows;
};

struct CrossValReport {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::string split_mode;  // "sample" or "group"
    std::vector<FoldResult> folds;
    Summary summary;
    std::string config_digest;
    std::vector<AblationTable> ablations;

    std::vector<double> per_fold_accuracy() const;
};

FoldPlan make_plan(const features::FeatureDataset& dataset, const HarnessConfig& config);

/// Per fold: z-score on training rows, train a fresh model, score the held-out rows.
CrossValReport cross_validate(const features::FeatureDataset& dataset, const HarnessConfig& config);

/// As above with a caller-supplied plan and a stratified training fraction.
CrossValReport cross_validate(const features::FeatureDataset& dataset, const HarnessConfig& config,
                              const FoldPlan& plan, double train_fraction = 1.0);

/// Training rows kept at `fraction`, stratified by class; sorted ascending.
std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> rows, std::span<const int> labels,
                                              double fraction, std::uint64_t seed);

AblationTable ablate_timeframes(std::span<const synth::Session> cohort, const features::FeatureLayout& base_layout,
                                const HarnessConfig& config);
AblationTable ablate_featuresets(std::span<const synth::Session> cohort, const features::FeatureLayout& base_layout,
                                 const HarnessConfig& config);
AblationTable ablate_train_fraction(const features::FeatureDataset& dataset, const HarnessConfig& config);

/// Copy with labels permuted by `seed` (chance-level control).
features::FeatureDataset shuffle_labels(const features::FeatureDataset& dataset, std::uint64_t seed);

/// Order-sensitive 64-bit FNV-1a digest of the given rows, as hex.
std::string rows_digest(const Eigen::MatrixXd& X, std::span<const std::size_t> rows);

}  // namespace fnirs::eval
