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
#include <vector>

#include "fnirs/signal.hpp"

namespace fnirs::synth {

struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t n_participants = 10;
    std::size_t n_channels = kDefaultChannels;
    double sampling_rate_hz = kDefaultSamplingRateHz;
    double effect_size = 1.0;  // relative stress-vs-control gain of evoked amplitude and variability
    double heart_rate_hz = 1.1;
    double cardiac_amplitude = 0.3;
    double noise_sd = 0.1;
    double hemodynamic_peak_delay_s = 6.0;
    double drift_amplitude = 0.05;

    void validate() const;
};

/// A recording together with the schedule it was acquired under.
struct Session {
    Recording recording;
    BlockSchedule schedule;
};

/// Gamma-density kernel with its mode at `peak_delay_s`, scaled to unit peak
/// and truncated at 20 s.
std::vector<double> hemodynamic_kernel(double peak_delay_s, double sampling_rate_hz);

/// Spread of the kernel (standard deviation of the underlying gamma law), s.
double hemodynamic_kernel_width_s(double peak_delay_s);

/// 1 inside task portions, 0 elsewhere.
std::vector<double> task_boxcar(const BlockSchedule& schedule, double sampling_rate_hz, std::size_t n_samples);

/// Noise-free unit-amplitude evoked response: boxcar convolved causally with
/// the kernel, normalized so a sustained task plateaus at 1.
std::vector<double> evoked_template(const BlockSchedule& schedule, double sampling_rate_hz, std::size_t n_samples,
                                    double peak_delay_s);

/// Deterministic in (config, participant_index). Uses the standard schedule
/// and a 500 s recording at the default rate.
Session generate_recording(const SynthConfig& config, std::size_t participant_index);

/// All participants; identical output for any thread count.
std::vector<Session> generate_cohort(const SynthConfig& config, unsigned threads = 1);

std::string participant_name(std::size_t index);

}  // namespace fnirs::synth
