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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fnirs/dsp.hpp"
#include "fnirs/eval.hpp"
#include "fnirs/features.hpp"
#include "fnirs/ica.hpp"
#include "fnirs/nn.hpp"
#include "fnirs/signal.hpp"
#include "fnirs/synth.hpp"

namespace fnirs::pipeline {

enum class StageOrder { ica_then_filter, filter_then_ica };

std::string_view to_string(StageOrder order);
StageOrder parse_stage_order(std::string_view text);

struct BandpassConfig {
    bool enabled = true;
    double low_hz = 0.001;
    double high_hz = 0.14;
    int order = 4;

    friend bool operator==(const BandpassConfig&, const BandpassConfig&) = default;
};

struct PreprocessConfig {
    bool ica_enabled = true;
    /// The pipeline removes the keep_count() most cardiac-like components.
    /// With keep_lowest, the evoked response rarely survives: every
    /// non-cardiac component scores near zero, so the ranking among them is
    /// noise.
    ica::DenoiseConfig ica{.polarity = ica::SelectionPolarity::drop_highest};
    BandpassConfig bandpass;
    StageOrder order = StageOrder::ica_then_filter;
    dsp::HeartbeatDetector heartbeat;
    dsp::CardiacWaveConfig cardiac;

    void validate(double sampling_rate_hz) const;
};

struct FeatureConfig {
    features::FeatureLayout layout;
    bool standardize = true;  // z-score per training split during evaluation
};

struct EvalConfig {
    std::size_t k = 5;
    std::uint64_t seed = 0;
    bool group_stratified = false;
    std::vector<double> fractions{1.0, 0.8, 0.6, 0.4, 0.2};
};

struct PipelineConfig {
    synth::SynthConfig synth;
    PreprocessConfig preprocess;
    FeatureConfig features;
    nn::NetworkSpec network;
    nn::TrainConfig train;
    EvalConfig eval;

    /// Checks every section before any stage runs.
    void validate() const;
    /// Sets every seed (synth, ICA, training, fold assignment) to `seed`.
    void override_seed(std::uint64_t seed);
    eval::HarnessConfig harness(unsigned threads) const;
};

/// First 16 hex digits of the SHA-256 of the canonical config JSON.
std::string config_digest(const PipelineConfig& config);

/// Per-series ICA bookkeeping.
struct IcaTrace {
    std::vector<ica::ComponentScore> scores;
    std::vector<std::size_t> kept;
    int iterations = 0;
    bool converged = false;

    friend bool operator==(const IcaTrace&, const IcaTrace&) = default;
};

struct PreprocessTrace {
    std::string participant_id;
    std::vector<double> beat_times_s;
    IcaTrace oxy;
    IcaTrace deoxy;
};

struct PreprocessResult {
    Recording recording;
    PreprocessTrace trace;
};

/// Heartbeats from the channel-mean oxy series -> cardiac reference wave ->
/// ICA denoise of the oxy and deoxy channel matrices, and the zero-phase
/// band-pass per channel, in the configured order.
PreprocessResult preprocess_recording(const Recording& recording, const PreprocessConfig& config);

std::vector<PreprocessResult> preprocess_cohort(std::span<const synth::Session> cohort,
                                                const PreprocessConfig& config, unsigned threads = 1);

}  // namespace fnirs::pipeline
