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


#include "fnirs/pipeline.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <optional>

#include "fnirs/error.hpp"
#include "fnirs/io.hpp"
#include "fnirs/parallel.hpp"

namespace fnirs::pipeline {
namespace {

constexpr std::uint64_t kOxyStream = 0;
constexpr std::uint64_t kDeoxyStream = 1;

ica::Matrix as_matrix(const Recording& r, HemoglobinKind kind) {
    ica::Matrix X(static_cast<Eigen::Index>(r.n_channels()), static_cast<Eigen::Index>(r.n_samples()));
    for (std::size_t c = 0; c < r.n_channels(); ++c) {
        const auto& s = kind == HemoglobinKind::oxy ? r.channel(c).oxy : r.channel(c).deoxy;
        for (std::size_t i = 0; i < s.size(); ++i) X(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = s[i];
    }
    return X;
}

void store_rows(const ica::Matrix& X, std::vector<Channel>& channels, HemoglobinKind kind) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
        auto& s = kind == HemoglobinKind::oxy ? channels[c].oxy : channels[c].deoxy;
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = X(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i));
    }
}

IcaTrace denoise_series(std::vector<Channel>& channels, const Recording& shape_of, HemoglobinKind kind,
                        std::span<const double> reference, ica::DenoiseConfig config, std::uint64_t stream) {
    config.seed = derive_seed(config.seed, {stream});
    const Recording current(shape_of.participant_id(), shape_of.sampling_rate_hz(), channels);
    ica::DenoiseResult result = ica::denoise(as_matrix(current, kind), reference, config);
    store_rows(result.cleaned, channels, kind);
    return {std::move(result.scores), std::move(result.kept), result.model.iterations, result.model.converged};
}

void bandpass_all(std::vector<Channel>& channels, const dsp::FilterSpec& filter) {
    for (Channel& ch : channels) {
        ch.oxy = dsp::apply_zero_phase(filter, ch.oxy);
        ch.deoxy = dsp::apply_zero_phase(filter, ch.deoxy);
    }
}

}  // namespace

std::string_view to_string(StageOrder order) {
    return order == StageOrder::ica_then_filter ? "ica_then_filter" : "filter_then_ica";
}

StageOrder parse_stage_order(std::string_view text) {
    if (text == "ica_then_filter") return StageOrder::ica_then_filter;
    if (text == "filter_then_ica") return StageOrder::filter_then_ica;
    throw ConfigError("unknown stage order '" + std::string(text) + "'");
}

void PreprocessConfig::validate(double sampling_rate_hz) const {
    ica.validate();
    if (bandpass.enabled) dsp::design_bandpass(bandpass.low_hz, bandpass.high_hz, sampling_rate_hz, bandpass.order);
    dsp::design_bandpass(heartbeat.low_cut_hz, heartbeat.high_cut_hz, sampling_rate_hz, 4);
    if (!(heartbeat.threshold_fraction >= 0.0) || !(heartbeat.global_floor_fraction >= 0.0) ||
        !(heartbeat.rolling_window_s > 0.0) ||
        !(heartbeat.refractory_s >= 0.0) || !(heartbeat.min_duration_s >= 0.0)) {
        throw ConfigError("preprocess: invalid heartbeat detector settings");
    }
    if (!(cardiac.sigma_s > 0.0) || !(cardiac.support_radius_sigmas > 0.0) || !std::isfinite(cardiac.amplitude)) {
        throw ConfigError("preprocess: invalid cardiac wave settings");
    }
}

void PipelineConfig::validate() const {
    synth.validate();
    preprocess.validate(synth.sampling_rate_hz);
    features.layout.validate();
    network.validate();
    train.validate();
    harness(1).validate();
    if (synth.n_participants == 0) throw ConfigError("synth: n_participants must be positive");
}

void PipelineConfig::override_seed(std::uint64_t seed) {
    synth.seed = seed;
    preprocess.ica.seed = seed;
    train.seed = seed;
    eval.seed = seed;
}

eval::HarnessConfig PipelineConfig::harness(unsigned threads) const {
    eval::HarnessConfig h;
    h.k = eval.k;
    h.seed = eval.seed;
    h.group_stratified = eval.group_stratified;
    h.standardize = features.standardize;
    h.fractions = eval.fractions;
    h.network = network;
    h.train = train;
    h.threads = threads;
    return h;
}

std::string config_digest(const PipelineConfig& config) {
    const std::string text = io::config_to_json(config);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericError("config digest: SHA-256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < 8 && i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

PreprocessResult preprocess_recording(const Recording& recording, const PreprocessConfig& config) {
    const double fs = recording.sampling_rate_hz();
    config.validate(fs);
    PreprocessTrace trace;
    trace.participant_id = recording.participant_id();
    std::vector<Channel> channels = recording.channels();

    std::optional<dsp::FilterSpec> filter;
    if (config.bandpass.enabled) {
        filter = dsp::design_bandpass(config.bandpass.low_hz, config.bandpass.high_hz, fs, config.bandpass.order);
    }
    auto run_ica = [&] {
        if (!config.ica_enabled) return;
        // The reference comes from the data as it enters this stage.
        const Recording current(recording.participant_id(), fs, channels);
        trace.beat_times_s = dsp::detect_heartbeats(current.channel_mean(HemoglobinKind::oxy), fs, config.heartbeat);
        const auto wave = dsp::simulate_cardiac_wave(trace.beat_times_s, current.duration_s(), fs, config.cardiac);
        trace.oxy = denoise_series(channels, recording, HemoglobinKind::oxy, wave, config.ica, kOxyStream);
        trace.deoxy = denoise_series(channels, recording, HemoglobinKind::deoxy, wave, config.ica, kDeoxyStream);
    };
    auto run_filter = [&] {
        if (filter) bandpass_all(channels, *filter);
    };
    if (config.order == StageOrder::ica_then_filter) {
        run_ica();
        run_filter();
    } else {
        run_filter();
        run_ica();
    }
    return {Recording(recording.participant_id(), fs, std::move(channels)), std::move(trace)};
}

std::vector<PreprocessResult> preprocess_cohort(std::span<const synth::Session> cohort,
                                                const PreprocessConfig& config, unsigned threads) {
    std::vector<std::optional<PreprocessResult>> slots(cohort.size());
    parallel_for(cohort.size(), threads, [&](std::size_t i) {
        with_context(cohort[i].recording.participant_id(),
                     [&] { slots[i] = preprocess_recording(cohort[i].recording, config); });
    });
    std::vector<PreprocessResult> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace fnirs::pipeline
