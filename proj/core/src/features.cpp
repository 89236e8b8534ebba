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

#include "fnirs/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fnirs/dsp.hpp"
#include "fnirs/error.hpp"

namespace fnirs::features {
namespace {

constexpr const char* kMomentNames[] = {"mean", "std", "skewness", "kurtosis"};

void append(std::vector<double>& out, const MomentSet& m) {
    out.insert(out.end(), {m.mean, m.std, m.skewness, m.kurtosis});
}

int kind_rank(HemoglobinKind k) { return static_cast<int>(k); }

}  // namespace

MomentSet time_moments(std::span<const double> x) {
    if (x.size() < 2) throw DimensionError("time_moments: need at least 2 samples");
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    MomentSet m;
    m.mean = mean;
    m.std = std::sqrt(m2);
    if (m.std < 1e-12 * std::max(1.0, std::abs(mean))) {
        m.std = std::max(m.std, 0.0);
        return m;
    }
    m.skewness = m3 / (m2 * m.std);
    m.kurtosis = m4 / (m2 * m2);
    return m;
}

MomentSet freq_moments(std::span<const double> x, double sampling_rate_hz) {
    if (x.size() < 4) throw DimensionError("freq_moments: need at least 4 samples");
    const auto spectrum = dsp::amplitude_spectrum(x, sampling_rate_hz);
    std::vector<double> amplitudes;
    amplitudes.reserve(spectrum.size());
    for (const auto& b : spectrum) amplitudes.push_back(b.amplitude);
    return time_moments(amplitudes);
}

std::string_view to_string(ChannelMode mode) {
    return mode == ChannelMode::averaged ? "averaged" : "per_channel";
}

std::string_view to_string(FeatureDomain domain) {
    return domain == FeatureDomain::time ? "time" : "frequency";
}

ChannelMode parse_channel_mode(std::string_view text) {
    if (text == "averaged") return ChannelMode::averaged;
    if (text == "per_channel") return ChannelMode::per_channel;
    throw ConfigError("unknown channel mode '" + std::string(text) + "'");
}

FeatureDomain parse_feature_domain(std::string_view text) {
    if (text == "time") return FeatureDomain::time;
    if (text == "frequency") return FeatureDomain::frequency;
    throw ConfigError("unknown feature domain '" + std::string(text) + "'");
}

void FeatureLayout::validate() const {
    if (signals.empty() || sections.empty() || domains.empty()) {
        throw ConfigError("feature layout: signals, sections and domains must be non-empty");
    }
    if (sections_per_window == 0) throw ConfigError("feature layout: sections_per_window must be positive");
    for (int s : sections) {
        if (s < 1 || static_cast<std::size_t>(s) > sections_per_window) {
            throw ConfigError("feature layout: section " + std::to_string(s) + " out of range 1.." +
                              std::to_string(sections_per_window));
        }
    }
}

FeatureLayout FeatureLayout::canonical() const {
    FeatureLayout out = *this;
    std::sort(out.signals.begin(), out.signals.end(),
              [](HemoglobinKind a, HemoglobinKind b) { return kind_rank(a) < kind_rank(b); });
    out.signals.erase(std::unique(out.signals.begin(), out.signals.end()), out.signals.end());
    std::sort(out.sections.begin(), out.sections.end());
    out.sections.erase(std::unique(out.sections.begin(), out.sections.end()), out.sections.end());
    std::sort(out.domains.begin(), out.domains.end());
    out.domains.erase(std::unique(out.domains.begin(), out.domains.end()), out.domains.end());
    return out;
}

std::size_t FeatureLayout::dimension(std::size_t n_channels) const {
    const FeatureLayout c = canonical();
    const std::size_t channels = channel_mode == ChannelMode::averaged ? 1 : n_channels;
    return channels * c.signals.size() * c.sections.size() * 4 * c.domains.size();
}

std::vector<std::string> FeatureLayout::feature_names(std::size_t n_channels) const {
    const FeatureLayout c = canonical();
    const std::size_t channels = channel_mode == ChannelMode::averaged ? 1 : n_channels;
    std::vector<std::string> names;
    names.reserve(dimension(n_channels));
    for (std::size_t ch = 0; ch < channels; ++ch) {
        std::string prefix;
        if (channel_mode == ChannelMode::per_channel) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "ch%02zu_", ch + 1);
            prefix = buf;
        }
        for (HemoglobinKind k : c.signals)
            for (int s : c.sections)
                for (FeatureDomain d : c.domains)
                    for (const char* m : kMomentNames) {
                        names.push_back(prefix + std::string(to_string(k)) + "_s" + std::to_string(s) + "_" +
                                        (d == FeatureDomain::time ? "time" : "freq") + "_" + m);
                    }
    }
    return names;
}

std::vector<double> window_features(const Recording& recording, const LabeledWindow& window,
                                    const FeatureLayout& layout) {
    layout.validate();
    if (window.end_sample > recording.n_samples() || window.start_sample >= window.end_sample) {
        throw RangeError("window_features: window [" + std::to_string(window.start_sample) + ", " +
                         std::to_string(window.end_sample) + ") outside recording");
    }
    const FeatureLayout c = layout.canonical();
    const auto sections = split_sections(window, c.sections_per_window);
    const double fs = recording.sampling_rate_hz();

    std::vector<double> out;
    out.reserve(c.dimension(recording.n_channels()));
    auto emit = [&](const std::vector<double>& series) {
        for (int s : c.sections) {
            const SampleRange r = sections[static_cast<std::size_t>(s - 1)];
            const std::span<const double> part(series.data() + r.begin, r.size());
            for (FeatureDomain d : c.domains) append(out, d == FeatureDomain::time ? time_moments(part)
                                                                                  : freq_moments(part, fs));
        }
    };
    if (c.channel_mode == ChannelMode::averaged) {
        for (HemoglobinKind k : c.signals) emit(recording.channel_mean(k));
    } else {
        for (std::size_t ch = 0; ch < recording.n_channels(); ++ch)
            for (HemoglobinKind k : c.signals) emit(recording.series(ch, k));
    }
    return out;
}

FeatureDataset FeatureDataset::subset(std::span<const std::size_t> indices) const {
    FeatureDataset out;
    out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(indices[i]);
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
        out.y.push_back(y.at(indices[i]));
        out.groups.push_back(groups.at(indices[i]));
        out.part_index.push_back(part_index.at(indices[i]));
    }
    out.columns = columns;
    out.layout = layout;
    out.n_channels = n_channels;
    out.provenance = provenance;
    return out;
}

FeatureDataset build_dataset(std::span<const synth::Session> cohort, const FeatureLayout& layout, bool standardize) {
    if (cohort.empty()) throw ConfigError("build_dataset: empty cohort");
    layout.validate();
    const std::size_t channels = cohort.front().recording.n_channels();
    const std::size_t dim = layout.dimension(channels);

    std::vector<std::vector<double>> rows;
    FeatureDataset ds;
    for (const synth::Session& s : cohort) {
        if (layout.channel_mode == ChannelMode::per_channel && s.recording.n_channels() != channels) {
            throw ConfigError("build_dataset: participant " + s.recording.participant_id() + " has " +
                              std::to_string(s.recording.n_channels()) + " channels, layout expects " +
                              std::to_string(channels));
        }
        for (const LabeledWindow& w : extract_task_windows(s.recording, s.schedule)) {
            rows.push_back(window_features(s.recording, w, layout));
            if (rows.back().size() != dim) throw ConfigError("build_dataset: inconsistent feature dimension");
            ds.y.push_back(w.level == Level::stress ? 1 : 0);
            ds.groups.push_back(s.recording.participant_id());
            ds.part_index.push_back(w.part_index);
        }
    }
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double v = rows[i][j];
            if (!std::isfinite(v)) throw NumericError("build_dataset: non-finite feature");
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    ds.columns = layout.feature_names(channels);
    ds.layout = layout.canonical();
    ds.n_channels = channels;
    if (standardize) ds.X = Standardizer::fit(ds.X).apply(ds.X);
    return ds;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X, std::span<const std::size_t> rows) {
    if (rows.empty()) throw ConfigError("standardizer: no rows to fit");
    Standardizer s;
    s.mean = Eigen::VectorXd::Zero(X.cols());
    s.scale = Eigen::VectorXd::Ones(X.cols());
    const double n = static_cast<double>(rows.size());
    for (std::size_t r : rows) s.mean += X.row(static_cast<Eigen::Index>(r)).transpose();
    s.mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(X.cols());
    for (std::size_t r : rows) var += (X.row(static_cast<Eigen::Index>(r)).transpose() - s.mean).array().square().matrix();
    var /= n;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt(var(j));
        s.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(j))) ? sd : 1.0;
    }
    return s;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(X.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return fit(X, rows);
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    return ((X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

}  // namespace fnirs::features
