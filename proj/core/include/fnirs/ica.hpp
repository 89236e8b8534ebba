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
#include <cstdint>
#include <span>
#include <vector>

namespace fnirs::ica {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class CorrelationMode { absolute, signed_value };

/// Which side of the score ranking survives reconstruction.
///  keep_lowest:  reconstruct from the keep_count() least cardiac-like components.
///  drop_highest: zero the keep_count() most cardiac-like components, keep the rest.
enum class SelectionPolarity { keep_lowest, drop_highest };

struct DenoiseConfig {
    double keep_fraction = 0.2;
    CorrelationMode correlation_mode = CorrelationMode::absolute;
    SelectionPolarity polarity = SelectionPolarity::keep_lowest;
    int max_iterations = 500;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
    /// max(1, round(keep_fraction * n)), rounding half away from zero.
    std::size_t keep_count(std::size_t n_components) const;
};

/// Centred, whitened data plus the transforms that produced it.
struct Whitening {
    Matrix whitened;     // components x samples
    Vector mean;         // per channel
    Matrix whitening;    // components x channels
    Matrix dewhitening;  // channels x components
};

struct IcaModel {
    Vector mean;
    Matrix whitening;
    Matrix dewhitening;
    Matrix unmixing;  // components x components, in whitened space
    std::size_t n_components = 0;
    int iterations = 0;
    bool converged = false;

    /// Component time courses (components x samples) of channel data X.
    Matrix sources(const Matrix& X) const;
    /// Channel data rebuilt from component time courses.
    Matrix reconstruct(const Matrix& sources) const;
};

/// Eigendecomposition whitening of channels x samples data. Throws
/// NumericError when an eigenvalue falls below 1e-12 x the largest.
Whitening center_whiten(const Matrix& X);

/// Symmetric fixed-point FastICA with the log-cosh contrast. Hitting
/// max_iterations leaves converged = false; it is not an error.
IcaModel fastica(const Whitening& white, const DenoiseConfig& config);

/// Pearson correlation; 0 when either side has zero variance.
double pearson_correlation(std::span<const double> a, std::span<const double> b);

struct ComponentScore {
    std::size_t component;
    double correlation;

    friend bool operator==(const ComponentScore&, const ComponentScore&) = default;
};

std::vector<ComponentScore> component_scores(const IcaModel& model, const Matrix& X,
                                             std::span<const double> reference, CorrelationMode mode);

struct DenoiseResult {
    Matrix cleaned;
    IcaModel model;
    std::vector<ComponentScore> scores;  // by component index
    std::vector<std::size_t> kept;       // ascending component indices
};

/// Removes components that resemble `reference` (a cardiac wave) and
/// rebuilds the channel data from the selected components.
DenoiseResult denoise(const Matrix& X, std::span<const double> reference, const DenoiseConfig& config);

}  // namespace fnirs::ica
