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

#include "fnirs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

#include "fnirs/error.hpp"
#include "fnirs/parallel.hpp"
#include "fnirs/random.hpp"

namespace fnirs::synth {
namespace {

constexpr double kGammaShape = 6.0;
constexpr double kKernelLength_s = 20.0;

// Shape of the evoked response. These set the difficulty of the
// classification problem; effect_size scales the stress contrast on top.
constexpr double kEvokedAmplitude = 0.5;
constexpr double kBlockAmplitudeLogSd = 0.2;
constexpr double kSpatialJitter = 0.5;
constexpr double kFluctuationSd = 0.12;
constexpr double kFluctuationTau_s = 2.0;
constexpr double kDeoxyRatio = 0.3;
constexpr double kBeatJitter = 0.05;

enum Stream : std::uint64_t { participant_stream = 0, channel_stream = 1000 };

// Task drive of one block convolved with the kernel. `ramp` weights the
// boxcar by 2 (t - onset) / duration, which has unit mean over the task.
std::vector<double> block_template(const BlockSchedule& schedule, std::size_t block, double fs, std::size_t n,
                                   const std::vector<double>& kernel, double kernel_sum, bool ramp) {
    double cursor = 0.0;
    for (std::size_t b = 0; b < block; ++b) {
        cursor += schedule.blocks()[b].rest_duration_s + schedule.blocks()[b].task_duration_s;
    }
    const Block& blk = schedule.blocks()[block];
    const std::size_t start = samples_for(cursor + blk.rest_duration_s, fs);
    const std::size_t len = samples_for(blk.task_duration_s, fs);
    const std::size_t end = std::min(n, start + len);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = start; i < std::min(n, end + kernel.size()); ++i) {
        double acc = 0.0;
        const std::size_t j_lo = i >= end ? i - end + 1 : 0;
        const std::size_t j_hi = std::min(kernel.size() - 1, i - start);
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const double drive = ramp ? 2.0 * static_cast<double>(i - j - start) / static_cast<double>(len) : 1.0;
            acc += kernel[j] * drive;
        }
        out[i] = acc / kernel_sum;
    }
    return out;
}

// Quasi-periodic cardiac oscillation with beat-to-beat frequency jitter;
// peaks land on the beat times.
std::vector<double> cardiac_oscillation(Rng& rng, double heart_rate_hz, double fs, std::size_t n) {
    const double duration = static_cast<double>(n) / fs;
    std::vector<double> beats;
    double t = -rng.uniform() / heart_rate_hz;
    while (t <= duration + 2.0 / heart_rate_hz) {
        beats.push_back(t);
        t += 1.0 / (heart_rate_hz * (1.0 + kBeatJitter * rng.uniform(-1.0, 1.0)));
    }
    std::vector<double> out(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i) / fs;
        while (k + 2 < beats.size() && beats[k + 1] <= ti) ++k;
        const double phase = (ti - beats[k]) / (beats[k + 1] - beats[k]);
        out[i] = std::cos(2.0 * std::numbers::pi * phase);
    }
    return out;
}

// Unit-variance AR(1) process with time constant tau.
std::vector<double> slow_noise(Rng& rng, double tau_s, double fs, std::size_t n) {
    const double phi = std::exp(-1.0 / (tau_s * fs));
    const double innov = std::sqrt(1.0 - phi * phi);
    std::vector<double> out(n);
    double state = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        state = phi * state + innov * rng.normal();
        out[i] = state;
    }
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (n_channels == 0) throw ConfigError("synth: n_channels must be positive");
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz)) {
        throw ConfigError("synth: sampling_rate_hz must be positive");
    }
    for (double v : {effect_size, heart_rate_hz, cardiac_amplitude, noise_sd, hemodynamic_peak_delay_s,
                     drift_amplitude}) {
        if (!finite_nonneg(v)) throw ConfigError("synth: rates and amplitudes must be finite and non-negative");
    }
    if (!(heart_rate_hz > 0.0)) throw ConfigError("synth: heart_rate_hz must be positive");
    if (!(hemodynamic_peak_delay_s > 0.0)) throw ConfigError("synth: hemodynamic_peak_delay_s must be positive");
    if (!(sampling_rate_hz > 2.0 * heart_rate_hz)) {
        throw ConfigError("synth: sampling rate must exceed twice the heart rate");
    }
}

std::vector<double> hemodynamic_kernel(double peak_delay_s, double sampling_rate_hz) {
    if (!(peak_delay_s > 0.0) || !(sampling_rate_hz > 0.0)) throw ConfigError("hemodynamic kernel: invalid parameters");
    const double scale = peak_delay_s / (kGammaShape - 1.0);
    const std::size_t n = samples_for(kKernelLength_s, sampling_rate_hz) + 1;
    std::vector<double> k(n);
    // Log-density relative to the mode keeps the peak at exactly 1.
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sampling_rate_hz;
        if (t <= 0.0) {
            k[i] = 0.0;
            continue;
        }
        const double r = t / peak_delay_s;
        k[i] = std::exp((kGammaShape - 1.0) * std::log(r) - (t - peak_delay_s) / scale);
    }
    return k;
}

double hemodynamic_kernel_width_s(double peak_delay_s) {
    return std::sqrt(kGammaShape) * peak_delay_s / (kGammaShape - 1.0);
}

std::vector<double> task_boxcar(const BlockSchedule& schedule, double sampling_rate_hz, std::size_t n_samples) {
    std::vector<double> box(n_samples, 0.0);
    for (const LabeledWindow& w : extract_task_windows(n_samples, sampling_rate_hz, schedule)) {
        std::fill(box.begin() + static_cast<std::ptrdiff_t>(w.start_sample),
                  box.begin() + static_cast<std::ptrdiff_t>(w.end_sample), 1.0);
    }
    return box;
}

std::vector<double> evoked_template(const BlockSchedule& schedule, double sampling_rate_hz, std::size_t n_samples,
                                    double peak_delay_s) {
    const std::vector<double> kernel = hemodynamic_kernel(peak_delay_s, sampling_rate_hz);
    double kernel_sum = 0.0;
    for (double v : kernel) kernel_sum += v;
    extract_task_windows(n_samples, sampling_rate_hz, schedule);  // range check
    std::vector<double> out(n_samples, 0.0);
    for (std::size_t b = 0; b < schedule.size(); ++b) {
        const auto part = block_template(schedule, b, sampling_rate_hz, n_samples, kernel, kernel_sum, false);
        for (std::size_t i = 0; i < n_samples; ++i) out[i] += part[i];
    }
    return out;
}

std::string participant_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "p%02zu", index);
    return buf;
}

Session generate_recording(const SynthConfig& config, std::size_t participant_index) {
    config.validate();
    if (participant_index >= config.n_participants) {
        throw RangeError("synth: participant index " + std::to_string(participant_index) + " out of range");
    }
    const double fs = config.sampling_rate_hz;
    BlockSchedule schedule = BlockSchedule::standard();
    const std::size_t n = samples_for(schedule.total_duration_s(), fs);
    const std::size_t n_blocks = schedule.size();

    Rng rng = Rng::substream(config.seed, {participant_index, participant_stream});

    const std::vector<double> kernel = hemodynamic_kernel(config.hemodynamic_peak_delay_s, fs);
    double kernel_sum = 0.0;
    for (double v : kernel) kernel_sum += v;
    // Stress adds a drive that builds up over the task, so after the
    // hemodynamic delay the contrast is strongest late in the window.
    std::vector<std::vector<double>> templates;
    std::vector<double> envelope(n, 0.0), stress_gain(n, 1.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        std::vector<double> t = block_template(schedule, b, fs, n, kernel, kernel_sum, false);
        const bool stress = schedule.blocks()[b].level == Level::stress;
        for (std::size_t i = 0; i < n; ++i) {
            envelope[i] += t[i];
            if (stress && t[i] > 0.0) stress_gain[i] = 1.0 + config.effect_size;
        }
        if (stress && config.effect_size > 0.0) {
            const std::vector<double> r = block_template(schedule, b, fs, n, kernel, kernel_sum, true);
            for (std::size_t i = 0; i < n; ++i) t[i] += config.effect_size * r[i];
        }
        templates.push_back(std::move(t));
    }

    std::vector<double> block_amplitude(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        block_amplitude[b] = kEvokedAmplitude * std::exp(kBlockAmplitudeLogSd * rng.normal());
    }

    const std::vector<double> cardiac = cardiac_oscillation(rng, config.heart_rate_hz, fs, n);
    const std::vector<double> fluctuation = slow_noise(rng, kFluctuationTau_s, fs, n);

    std::vector<double> drift(n, 0.0);
    for (int j = 0; j < 3; ++j) {
        const double f = rng.uniform(0.002, 0.01);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < n; ++i) {
            drift[i] += config.drift_amplitude * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + phase);
        }
    }

    std::vector<Channel> channels(config.n_channels);
    for (std::size_t c = 0; c < config.n_channels; ++c) {
        Rng crng = Rng::substream(config.seed, {participant_index, channel_stream + c});
        const double cardiac_gain = crng.uniform(0.8, 1.2);
        const double evoked_gain = crng.uniform(0.8, 1.2);
        const double drift_gain = crng.uniform(0.8, 1.2);
        std::vector<double> pattern(n_blocks);
        for (std::size_t b = 0; b < n_blocks; ++b) {
            pattern[b] = block_amplitude[b] * (evoked_gain + kSpatialJitter * crng.normal());
        }
        const double fluctuation_gain = crng.uniform(0.8, 1.2);

        Channel& ch = channels[c];
        ch.oxy.resize(n);
        ch.deoxy.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double evoked = fluctuation_gain * kFluctuationSd * stress_gain[i] * envelope[i] * fluctuation[i];
            for (std::size_t b = 0; b < n_blocks; ++b) evoked += pattern[b] * templates[b][i];
            ch.oxy[i] = drift_gain * drift[i] + evoked + config.cardiac_amplitude * cardiac_gain * cardiac[i] +
                        config.noise_sd * crng.normal();
            ch.deoxy[i] = -kDeoxyRatio * evoked + config.noise_sd * crng.normal();
        }
    }

    return Session{Recording(participant_name(participant_index), fs, std::move(channels)), std::move(schedule)};
}

std::vector<Session> generate_cohort(const SynthConfig& config, unsigned threads) {
    config.validate();
    std::vector<std::optional<Session>> slots(config.n_participants);
    parallel_for(config.n_participants, threads, [&](std::size_t p) { slots[p] = generate_recording(config, p); });
    std::vector<Session> cohort;
    cohort.reserve(slots.size());
    for (auto& s : slots) cohort.push_back(std::move(*s));
    return cohort;
}

}  // namespace fnirs::synth
