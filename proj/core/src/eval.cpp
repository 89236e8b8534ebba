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


#include "fnirs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>

#include "fnirs/error.hpp"
#include "fnirs/parallel.hpp"
#include "fnirs/random.hpp"

namespace fnirs::eval {
namespace {

constexpr std::uint64_t kSplitStream = 0x5b11;
constexpr std::uint64_t kFractionStream = 0xf7ac;
constexpr std::uint64_t kShuffleStream = 0x5a1e;

// Cuts `order` into k chunks, larger chunks first.
std::vector<std::size_t> chunk_assign(std::span<const std::size_t> order, std::size_t k) {
    std::vector<std::size_t> fold_of(order.size());
    const std::size_t base = order.size() / k, extra = order.size() % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) fold_of[order[pos++]] = f;
    }
    return fold_of;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::substream(seed, {kSplitStream});
    rng.shuffle(std::span<std::size_t>(order));
    return order;
}

std::string format_fraction(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", f);
    return buf;
}

std::optional<double> reference_fraction_accuracy(double f) {
    static const std::map<int, double> table{{100, 88.52}, {80, 85.57}, {60, 82.33}, {40, 81.54}, {20, 78.58}};
    const int key = static_cast<int>(std::lround(f * 100.0));
    if (std::abs(f * 100.0 - key) > 1e-9) return std::nullopt;
    auto it = table.find(key);
    return it == table.end() ? std::nullopt : std::optional(it->second);
}

AblationRow row_from(std::string key, const CrossValReport& report, std::optional<double> reference) {
    return {std::move(key), report.summary, report.per_fold_accuracy(), reference};
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    if (fold >= k) throw ConfigError("fold plan: fold " + std::to_string(fold) + " out of range");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    if (fold >= k) throw ConfigError("fold plan: fold " + std::to_string(fold) + " out of range");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t f : assignments) ++sizes.at(f);
    return sizes;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be at least 2");
    if (n < k) throw ConfigError("kfold: " + std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
    const auto order = permutation(n, seed);
    return {k, seed, false, chunk_assign(order, k)};
}

FoldPlan group_kfold_split(std::span<const std::string> groups, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be at least 2");
    std::vector<std::string> names(groups.begin(), groups.end());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    if (names.size() < k) {
        throw ConfigError("group kfold: " + std::to_string(names.size()) + " groups cannot fill " +
                          std::to_string(k) + " folds");
    }
    const auto order = permutation(names.size(), seed);
    const auto group_fold = chunk_assign(order, k);
    FoldPlan plan{k, seed, true, {}};
    plan.assignments.reserve(groups.size());
    for (const std::string& g : groups) {
        const auto it = std::lower_bound(names.begin(), names.end(), g);
        plan.assignments.push_back(group_fold[static_cast<std::size_t>(it - names.begin())]);
    }
    return plan;
}

Summary aggregate(std::span<const double> values) {
    if (values.empty()) throw ConfigError("aggregate: no values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

std::string mean_pm_std(const Summary& summary, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, summary.mean, decimals, summary.std);
    return buf;
}

void HarnessConfig::validate() const {
    if (k < 2) throw ConfigError("eval: k must be at least 2");
    if (fractions.empty()) throw ConfigError("eval: fractions must not be empty");
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("eval: fractions must be in (0, 1]");
    network.validate();
    train.validate();
}

std::vector<double> CrossValReport::per_fold_accuracy() const {
    std::vector<double> out;
    for (const FoldResult& f : folds) out.push_back(f.accuracy);
    return out;
}

std::string rows_digest(const Eigen::MatrixXd& X, std::span<const std::size_t> rows) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t r : rows) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double v = X(static_cast<Eigen::Index>(r), j);
            unsigned char bytes[sizeof v];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char b : bytes) h = (h ^ b) * 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

FoldPlan make_plan(const features::FeatureDataset& dataset, const HarnessConfig& config) {
    return config.group_stratified ? group_kfold_split(dataset.groups, config.k, config.seed)
                                   : kfold_split(dataset.rows(), config.k, config.seed);
}

std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> rows, std::span<const int> labels,
                                              double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("subsample: fraction must be in (0, 1]");
    std::vector<std::size_t> kept;
    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t r : rows)
            if (labels[r] == cls) members.push_back(r);
        const auto keep = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
        if (keep < 2) {
            throw ConfigError("subsample: fraction " + format_fraction(fraction) + " leaves " + std::to_string(keep) +
                              " samples of class " + std::to_string(cls));
        }
        Rng rng = Rng::substream(seed, {static_cast<std::uint64_t>(cls)});
        rng.shuffle(std::span<std::size_t>(members));
        kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

CrossValReport cross_validate(const features::FeatureDataset& dataset, const HarnessConfig& config) {
    config.validate();
    return cross_validate(dataset, config, make_plan(dataset, config));
}

CrossValReport cross_validate(const features::FeatureDataset& dataset, const HarnessConfig& config,
                              const FoldPlan& plan, double train_fraction) {
    config.validate();
    if (plan.size() != dataset.rows()) throw DimensionError("cross_validate: fold plan does not match dataset rows");
    if (dataset.y.size() != dataset.rows()) throw DimensionError("cross_validate: label count does not match rows");

    CrossValReport report;
    report.k = plan.k;
    report.seed = config.seed;
    report.split_mode = plan.grouped ? "group" : "sample";
    report.folds.resize(plan.k);

    // Validate every fold up front so the error names the first bad fold
    // regardless of scheduling.
    std::vector<std::vector<std::size_t>> train_rows(plan.k), test_rows(plan.k);
    for (std::size_t f = 0; f < plan.k; ++f) {
        train_rows[f] = plan.train_indices(f);
        test_rows[f] = plan.test_indices(f);
        if (train_fraction < 1.0) {
            train_rows[f] = stratified_subsample(train_rows[f], dataset.y,
                                                 train_fraction, derive_seed(config.seed, {kFractionStream, f}));
        }
        bool has[2] = {false, false};
        for (std::size_t r : train_rows[f]) has[dataset.y[r] != 0] = true;
        if (!has[0] || !has[1]) {
            throw ConfigError("cross_validate: training split of fold " + std::to_string(f) + " has a single class");
        }
        if (test_rows[f].empty()) throw ConfigError("cross_validate: fold " + std::to_string(f) + " is empty");
    }

    parallel_for(plan.k, config.threads, [&](std::size_t f) {
        const auto& train_idx = train_rows[f];
        const auto& test_idx = test_rows[f];
        const std::string before = rows_digest(dataset.X, test_idx);

        Eigen::MatrixXd X = dataset.X;
        if (config.standardize) X = features::Standardizer::fit(dataset.X, train_idx).apply(dataset.X);
        Eigen::MatrixXd X_train(static_cast<Eigen::Index>(train_idx.size()), X.cols());
        Eigen::MatrixXd X_test(static_cast<Eigen::Index>(test_idx.size()), X.cols());
        std::vector<int> y_train, y_test;
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
            X_train.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(train_idx[i]));
            y_train.push_back(dataset.y[train_idx[i]]);
        }
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
            X_test.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(test_idx[i]));
            y_test.push_back(dataset.y[test_idx[i]]);
        }

        nn::TrainConfig tc = config.train;
        tc.seed = derive_seed(config.train.seed, {f});
        nn::TrainResult trained = nn::train(config.network, X_train, y_train, tc);
        const auto predicted = nn::predict(trained.model, X_test);

        const std::string after = rows_digest(dataset.X, test_idx);
        if (before != after) throw NumericError("cross_validate: test rows of fold " + std::to_string(f) + " changed");

        FoldResult& out = report.folds[f];
        out.fold = f;
        out.n_train = train_idx.size();
        out.n_test = test_idx.size();
        out.accuracy = 100.0 * nn::accuracy(predicted, y_test);
        out.test_digest = after;
        out.loss_curve = std::move(trained.loss_curve);
    });

    report.summary = aggregate(report.per_fold_accuracy());
    return report;
}

AblationTable ablate_timeframes(std::span<const synth::Session> cohort, const features::FeatureLayout& base_layout,
                                const HarnessConfig& config) {
    static constexpr double kReference[] = {71.11, 78.32, 85.14};
    AblationTable table{"timeframe", {}};
    const int n_frames = static_cast<int>(base_layout.sections_per_window);
    for (int s = 1; s <= n_frames; ++s) {
        features::FeatureLayout layout = base_layout;
        layout.sections = {s};
        const auto ds = features::build_dataset(cohort, layout);
        const auto ref = s <= 3 && n_frames == 3 ? std::optional(kReference[s - 1]) : std::nullopt;
        table.rows.push_back(row_from(std::to_string(s), cross_validate(ds, config), ref));
    }
    return table;
}

AblationTable ablate_featuresets(std::span<const synth::Session> cohort, const features::FeatureLayout& base_layout,
                                 const HarnessConfig& config) {
    using features::FeatureDomain;
    struct Cell {
        const char* key;
        std::vector<FeatureDomain> domains;
        double reference;
    };
    const Cell cells[] = {{"time", {FeatureDomain::time}, 86.10},
                          {"frequency", {FeatureDomain::frequency}, 80.74},
                          {"all", {FeatureDomain::time, FeatureDomain::frequency}, 88.52}};
    AblationTable table{"featureset", {}};
    for (const Cell& cell : cells) {
        features::FeatureLayout layout = base_layout;
        layout.domains = cell.domains;
        const auto ds = features::build_dataset(cohort, layout);
        table.rows.push_back(row_from(cell.key, cross_validate(ds, config), cell.reference));
    }
    return table;
}

AblationTable ablate_train_fraction(const features::FeatureDataset& dataset, const HarnessConfig& config) {
    config.validate();
    const FoldPlan plan = make_plan(dataset, config);
    AblationTable table{"fraction", {}};
    for (double f : config.fractions) {
        table.rows.push_back(row_from(format_fraction(f), cross_validate(dataset, config, plan, f),
                                      reference_fraction_accuracy(f)));
    }
    return table;
}

features::FeatureDataset shuffle_labels(const features::FeatureDataset& dataset, std::uint64_t seed) {
    features::FeatureDataset out = dataset;
    Rng rng = Rng::substream(seed, {kShuffleStream});
    rng.shuffle(std::span<int>(out.y));
    out.provenance += out.provenance.empty() ? "labels shuffled" : "; labels shuffled";
    return out;
}

}  // namespace fnirs::eval
