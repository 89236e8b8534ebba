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

#include "fnirs/ica.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fnirs/error.hpp"
#include "fnirs/random.hpp"

namespace fnirs::ica {
namespace {

// (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& W) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(W * W.transpose());
    if (eig.info() != Eigen::Success) throw NumericError("fastica: eigendecomposition failed");
    const Vector d = eig.eigenvalues();
    if (d.minCoeff() <= 0.0) throw NumericError("fastica: unmixing matrix became singular");
    const Matrix& E = eig.eigenvectors();
    return E * d.cwiseSqrt().cwiseInverse().asDiagonal() * E.transpose() * W;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

// tanh through the vectorized exp; arguments beyond +-20 saturate to +-1 in
// double precision anyway.
Matrix fast_tanh(const Matrix& x) {
    const auto e = (2.0 * x.array().cwiseMax(-20.0).cwiseMin(20.0)).exp();
    return ((e - 1.0) / (e + 1.0)).matrix();
}

}  // namespace

void DenoiseConfig::validate() const {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("ica: keep_fraction must be in (0, 1]");
    if (max_iterations < 1) throw ConfigError("ica: max_iterations must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("ica: tolerance must be positive");
}

std::size_t DenoiseConfig::keep_count(std::size_t n_components) const {
    const double k = std::round(keep_fraction * static_cast<double>(n_components));
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, std::max<std::size_t>(1, n_components));
}

Matrix IcaModel::sources(const Matrix& X) const {
    return unmixing * (whitening * (X.colwise() - mean));
}

Matrix IcaModel::reconstruct(const Matrix& S) const {
    // The unmixing matrix is orthonormal, so its inverse is its transpose.
    return (dewhitening * (unmixing.transpose() * S)).colwise() + mean;
}

Whitening center_whiten(const Matrix& X) {
    const auto channels = X.rows();
    const auto samples = X.cols();
    if (channels < 1) throw DimensionError("center_whiten: no channels");
    if (samples <= channels) {
        throw DimensionError("center_whiten: need more samples (" + std::to_string(samples) + ") than channels (" +
                             std::to_string(channels) + ")");
    }
    if (!all_finite(X)) throw NumericError("center_whiten: non-finite input");

    Whitening w;
    w.mean = X.rowwise().mean();
    const Matrix centered = X.colwise() - w.mean;
    const Matrix cov = centered * centered.transpose() / static_cast<double>(samples);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("center_whiten: eigendecomposition failed");
    // Eigen sorts ascending; flip so component 0 carries the most variance.
    const Vector d = eig.eigenvalues().reverse();
    const Matrix E = eig.eigenvectors().rowwise().reverse();
    const double floor = 1e-12 * d(0);
    if (!(d(0) > 0.0) || d(channels - 1) < floor) {
        throw NumericError("center_whiten: covariance is rank deficient (eigenvalue " +
                           std::to_string(d(channels - 1)) + " below 1e-12 x max eigenvalue " + std::to_string(d(0)) +
                           ")");
    }
    w.whitening = d.cwiseSqrt().cwiseInverse().asDiagonal() * E.transpose();
    w.dewhitening = E * d.cwiseSqrt().asDiagonal();
    w.whitened = w.whitening * centered;
    return w;
}

IcaModel fastica(const Whitening& white, const DenoiseConfig& config) {
    config.validate();
    const Matrix& Z = white.whitened;
    const auto k = Z.rows();
    const double inv_t = 1.0 / static_cast<double>(Z.cols());

    Rng rng = Rng::substream(config.seed, {0x1ca});
    Matrix W(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) W(i, j) = rng.normal();
    W = symmetric_decorrelation(W);

    IcaModel model;
    model.mean = white.mean;
    model.whitening = white.whitening;
    model.dewhitening = white.dewhitening;
    model.n_components = static_cast<std::size_t>(k);

    for (int it = 1; it <= config.max_iterations; ++it) {
        const Matrix G = fast_tanh(W * Z);
        const Vector g_prime_mean = (1.0 - G.array().square()).rowwise().sum().matrix() * inv_t;
        Matrix W_next = G * Z.transpose() * inv_t - g_prime_mean.asDiagonal() * W;
        if (!all_finite(W_next)) throw NumericError("fastica: non-finite update at iteration " + std::to_string(it));
        W_next = symmetric_decorrelation(W_next);

        const double lim = ((W_next * W.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
        W = std::move(W_next);
        model.iterations = it;
        if (lim < config.tolerance) {
            model.converged = true;
            break;
        }
    }
    model.unmixing = std::move(W);
    return model;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("pearson_correlation: length mismatch");
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::vector<ComponentScore> component_scores(const IcaModel& model, const Matrix& X,
                                             std::span<const double> reference, CorrelationMode mode) {
    if (static_cast<Eigen::Index>(reference.size()) != X.cols()) {
        throw DimensionError("component_scores: reference has " + std::to_string(reference.size()) +
                             " samples, data has " + std::to_string(X.cols()));
    }
    // Row-major copy so each component is contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> S = model.sources(X);
    std::vector<ComponentScore> scores;
    scores.reserve(static_cast<std::size_t>(S.rows()));
    for (Eigen::Index c = 0; c < S.rows(); ++c) {
        const std::span<const double> row(S.data() + c * S.cols(), static_cast<std::size_t>(S.cols()));
        double r = pearson_correlation(row, reference);
        if (mode == CorrelationMode::absolute) r = std::abs(r);
        scores.push_back({static_cast<std::size_t>(c), r});
    }
    return scores;
}

DenoiseResult denoise(const Matrix& X, std::span<const double> reference, const DenoiseConfig& config) {
    config.validate();
    const Whitening white = center_whiten(X);
    DenoiseResult result;
    result.model = fastica(white, config);
    result.scores = component_scores(result.model, X, reference, config.correlation_mode);

    const std::size_t n = result.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.scores[a].correlation < result.scores[b].correlation;
    });
    const std::size_t k = config.keep_count(n);
    if (config.polarity == SelectionPolarity::keep_lowest) {
        result.kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
        const std::size_t drop = std::min(k, n);
        result.kept.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(drop));
    }
    std::sort(result.kept.begin(), result.kept.end());

    Matrix S = result.model.unmixing * white.whitened;
    Matrix masked = Matrix::Zero(S.rows(), S.cols());
    for (std::size_t c : result.kept) masked.row(static_cast<Eigen::Index>(c)) = S.row(static_cast<Eigen::Index>(c));
    result.cleaned = result.model.reconstruct(masked);
    if (!all_finite(result.cleaned)) throw NumericError("denoise: non-finite reconstruction");
    return result;
}

}  // namespace fnirs::ica
