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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fnirs::dsp {

/// One second-order section, a0 normalized to 1.
struct Biquad {
    double b0, b1, b2;
    double a1, a2;

    friend bool operator==(const Biquad&, const Biquad&) = default;
};

/// Digital Butterworth band-pass as a cascade of second-order sections.
struct FilterSpec {
    double low_cut_hz = 0.0;
    double high_cut_hz = 0.0;
    double sampling_rate_hz = 0.0;
    int order = 0;  // prototype order; the band-pass has 2*order poles
    std::vector<Biquad> sections;

    /// Expanded transfer-function polynomials in z^-1 (informational; the
    /// cascade is what gets evaluated).
    std::vector<double> feedforward() const;
    std::vector<double> feedback() const;

    std::complex<double> response(double frequency_hz) const;
    double gain_db(double frequency_hz) const;
    /// Every pole strictly inside the unit circle.
    bool is_stable() const;
    /// Edge padding used by apply_zero_phase: 3 x filter state size.
    std::size_t pad_length() const { return 3 * 2 * sections.size(); }
};

/// Butterworth band-pass designed by bilinear transform with pre-warping.
/// Throws ConfigError on invalid cutoffs, NumericError on an unstable result.
FilterSpec design_bandpass(double low_cut_hz, double high_cut_hz, double sampling_rate_hz, int order = 4);

/// Causal cascade filtering from zero initial state.
std::vector<double> apply_causal(const FilterSpec& filter, std::span<const double> x);

/// Forward-backward filtering with odd-reflection padding and steady-state
/// initial conditions. Requires x.size() > filter.pad_length().
std::vector<double> apply_zero_phase(const FilterSpec& filter, std::span<const double> x);

struct SpectrumBin {
    double frequency_hz;
    double amplitude;
};

/// One-sided magnitude spectrum of the mean-removed series: bins k = 1..N/2
/// at k*fs/N, with the unnormalized forward transform.
std::vector<SpectrumBin> amplitude_spectrum(std::span<const double> x, double sampling_rate_hz);

/// Sum of squared spectrum amplitudes whose frequency lies in [low_hz, high_hz].
double band_energy(std::span<const double> x, double sampling_rate_hz, double low_hz, double high_hz);

struct HeartbeatDetector {
    double low_cut_hz = 0.8;
    double high_cut_hz = 2.0;
    double threshold_fraction = 0.5;  // of the rolling standard deviation
    double rolling_window_s = 2.0;
    /// Peaks must also clear this fraction of the whole filtered series' RMS,
    /// which rejects filter ringing in stretches without beats.
    double global_floor_fraction = 0.3;
    double refractory_s = 0.4;
    double min_duration_s = 5.0;
    /// Parabolic interpolation of each peak. Off by default: beats then sit
    /// on sample instants and every reference pulse has the same sampled
    /// shape, which keeps grid aliasing out of the reference wave.
    bool subsample_refinement = false;
};

/// Beat times in seconds: band-pass, rolling-std threshold, local maxima with
/// a refractory period. Throws DimensionError below min_duration_s of data.
std::vector<double> detect_heartbeats(std::span<const double> x, double sampling_rate_hz,
                                      const HeartbeatDetector& detector = {});

struct CardiacWaveConfig {
    double amplitude = 1.0;
    double sigma_s = 0.05;
    double support_radius_sigmas = 5.0;
};

/// Sum of constant-amplitude Gaussians centred on the beat times, sampled at
/// n / fs for n in [0, round(duration * fs)).
std::vector<double> simulate_cardiac_wave(std::span<const double> beat_times_s, double duration_s,
                                          double sampling_rate_hz, const CardiacWaveConfig& config = {});

}  // namespace fnirs::dsp
