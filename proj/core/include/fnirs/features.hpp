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

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fnirs/signal.hpp"
#include "fnirs/synth.hpp"

namespace fnirs::features {

/// Population moments with Pearson (non-excess) kurtosis.
struct MomentSet {
    double mean = 0.0;
    double std = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
};

/// Skewness and kurtosis are 0 when std < 1e-12 * max(1, |mean|).
MomentSet time_moments(std::span<const double> x);

/// time_moments of the amplitude sequence of dsp::amplitude_spectrum(x).
MomentSet freq_moments(std::span<const double> x, double sampling_rate_hz);

enum class ChannelMode { averaged, per_channel };
enum class FeatureDomain { time, frequency };

std::string_view to_string(ChannelMode mode);
std::string_view to_string(FeatureDomain domain);
ChannelMode parse_channel_mode(std::string_view text);
FeatureDomain parse_feature_domain(std::string_view text);

/// Which slices of a task window become features. Selections are kept in
/// canonical order (oxy, deoxy, total; sections ascending; time before
/// frequency) regardless of how they were supplied.
struct FeatureLayout {
    ChannelMode channel_mode = ChannelMode::averaged;
    std::vector<HemoglobinKind> signals{HemoglobinKind::oxy, HemoglobinKind::total};
    std::vector<int> sections{1, 2, 3};  // 1-based
    std::vector<FeatureDomain> domains{FeatureDomain::time, FeatureDomain::frequency};
    std::size_t sections_per_window = 3;

    void validate() const;
    FeatureLayout canonical() const;
    std::size_t dimension(std::size_t n_channels) const;
    /// Column names in vector order, e.g. "oxy_s1_time_mean" or "ch03_total_s2_freq_kurtosis".
    std::vector<std::string> feature_names(std::size_t n_channels) const;

    friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

/// Feature vector for one window; ordering is channel (per_channel mode
/// only), then signal, then section, then domain, then moment.
std::vector<double> window_features(const Recording& recording, const LabeledWindow& window,
                                    const FeatureLayout& layout);

struct FeatureDataset {
    Eigen::MatrixXd X;  // samples x dimension
    std::vector<int> y;  // 0 = control, 1 = stress
    std::vector<std::string> groups;  // participant per row
    std::vector<std::size_t> part_index;  // window index within the participant's schedule
    std::vector<std::string> columns;
    FeatureLayout layout;
    std::size_t n_channels = 0;
    std::string provenance;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(X.cols()); }
    /// Copy restricted to `indices`, in that order.
    FeatureDataset subset(std::span<const std::size_t> indices) const;
};

/// One row per task window across the cohort. With `standardize` every
/// column is z-scored using statistics of all rows.
FeatureDataset build_dataset(std::span<const synth::Session> cohort, const FeatureLayout& layout,
                             bool standardize = false);

/// Per-column z-scoring fitted on a subset of rows. Columns with zero spread
/// are centred only.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& X, std::span<const std::size_t> rows);
    static Standardizer fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

}  // namespace fnirs::features
