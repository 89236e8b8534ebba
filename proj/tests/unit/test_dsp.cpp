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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fnirs/dsp.hpp"
#include "fnirs/error.hpp"
#include "fnirs/synth.hpp"
#include "support/oracles.hpp"

using namespace fnirs;
using namespace fnirs::dsp;

namespace {

std::vector<double> sine(std::size_t n, double f, double fs, double amplitude = 1.0, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = amplitude * std::cos(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + phase);
    }
    return x;
}

const FilterSpec& default_band() {
    static const FilterSpec spec = design_bandpass(0.001, 0.14, 10.0, 4);
    return spec;
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("band-pass design meets its gain targets") {
    const FilterSpec& f = default_band();
    CHECK(f.is_stable());
    CHECK(f.sections.size() == 4);
    const double g05 = 20.0 * std::log10(std::abs(oracle::cascade_response(f, 0.05)));
    const double g1 = 20.0 * std::log10(std::abs(oracle::cascade_response(f, 1.0)));
    CHECK(std::fabs(g05) <= 1.0);
    CHECK(g1 <= -20.0);
    CHECK(f.gain_db(0.05) == doctest::Approx(g05).epsilon(1e-9));
    // Geometric-mean frequency sits at unity.
    CHECK(std::fabs(f.gain_db(std::sqrt(0.001 * 0.14))) <= 1.0);
    // DC and Nyquist are blocked.
    CHECK(std::abs(oracle::cascade_response(f, 0.0)) < 1e-9);
    CHECK(std::abs(oracle::cascade_response(f, 5.0)) < 1e-9);
}

TEST_CASE("expanded polynomials agree with the cascade") {
    const FilterSpec& f = default_band();
    const auto b = f.feedforward();
    const auto a = f.feedback();
    REQUIRE(b.size() == 9);
    REQUIRE(a.size() == 9);
    CHECK(a[0] == doctest::Approx(1.0));
    // The expanded form is badly conditioned next to the clustered poles of
    // the 0.001 Hz edge, so it is compared only well above the passband.
    for (double freq : {1.0, 2.0, 4.0}) {
        const double w = 2.0 * std::numbers::pi * freq / 10.0;
        std::complex<double> num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            num += b[k] * std::polar(1.0, -w * static_cast<double>(k));
            den += a[k] * std::polar(1.0, -w * static_cast<double>(k));
        }
        CHECK(std::abs(num / den) == doctest::Approx(std::abs(oracle::cascade_response(f, freq))).epsilon(1e-6));
    }
}

TEST_CASE("band-pass design rejects invalid cutoffs") {
    CHECK_THROWS_AS(design_bandpass(0.14, 0.001, 10.0), ConfigError);
    CHECK_THROWS_AS(design_bandpass(0.0, 0.14, 10.0), ConfigError);
    CHECK_THROWS_AS(design_bandpass(0.1, 5.0, 10.0), ConfigError);
    CHECK_THROWS_AS(design_bandpass(0.1, 0.2, 10.0, 0), ConfigError);
}

TEST_CASE("causal filtering reaches the designed steady-state gain") {
    // The 0.001 Hz edge settles slowly, so measure over the tail of a long run.
    const FilterSpec& f = default_band();
    const std::size_t n = 200000;
    const auto x = sine(n, 0.05, 10.0);
    const auto y = apply_causal(f, x);
    const auto fit = oracle::fit_sinusoid(y, 0.05, 10.0, n - 20000, n);
    CHECK(fit.amplitude == doctest::Approx(std::abs(oracle::cascade_response(f, 0.05))).epsilon(1e-3));
}

TEST_CASE("zero-phase filtering of an in-band sinusoid") {
    const FilterSpec& f = default_band();
    const std::size_t n = 60000;
    const double phase = 0.3;
    const auto x = sine(n, 0.05, 10.0, 2.0, phase);
    const auto y = apply_zero_phase(f, x);
    REQUIRE(y.size() == n);
    const auto fit = oracle::fit_sinusoid(y, 0.05, 10.0, n / 4, 3 * n / 4);
    const double deg = std::fabs(fit.phase_rad - phase) * 180.0 / std::numbers::pi;
    CHECK(deg < 1.0);
    CHECK(std::fabs(20.0 * std::log10(fit.amplitude / 2.0)) <= 1.0);
}

TEST_CASE("zero-phase filtering blocks DC and keeps zero at zero") {
    const FilterSpec f = design_bandpass(0.05, 1.0, 10.0, 4);
    const std::vector<double> c(4000, 3.5);
    const auto y = apply_zero_phase(f, c);
    for (std::size_t i = 500; i < 3500; ++i) REQUIRE(std::fabs(y[i]) < 1e-3 * 3.5);
    const std::vector<double> z(100, 0.0);
    for (double v : apply_zero_phase(f, z)) CHECK(v == 0.0);
    CHECK_THROWS_AS(apply_zero_phase(f, std::vector<double>(f.pad_length(), 1.0)), DimensionError);
}

TEST_CASE("zero-phase filtering is linear and time-reversible") {
    const FilterSpec f = design_bandpass(0.02, 0.5, 10.0, 4);
    // Edge transients die out at the slowest pole's rate; skip until they
    // are below 1e-12.
    double radius = 0.0;
    for (const auto& s : f.sections) radius = std::max(radius, std::sqrt(s.a2));
    const auto edge = static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(radius)));
    oracle::Gen gen(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 * edge + gen.size(500, 3000);
        const auto x = gen.normal_vector(n);
        const auto y = gen.normal_vector(n);
        const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
        std::vector<double> mix(n);
        for (std::size_t i = 0; i < n; ++i) mix[i] = a * x[i] + b * y[i];
        const auto fx = apply_zero_phase(f, x), fy = apply_zero_phase(f, y), fm = apply_zero_phase(f, mix);
        double scale = 0.0;
        for (double v : fm) scale = std::max(scale, std::fabs(v));
        for (std::size_t i = 0; i < n; ++i) REQUIRE(std::fabs(fm[i] - (a * fx[i] + b * fy[i])) <= 1e-9 * scale);

        std::vector<double> rev(x.rbegin(), x.rend());
        auto fr = apply_zero_phase(f, rev);
        std::reverse(fr.begin(), fr.end());
        for (std::size_t i = edge; i + edge < n; ++i) REQUIRE(std::fabs(fr[i] - fx[i]) <= 1e-9 * scale);
    }
}

TEST_CASE("amplitude spectrum matches the direct transform") {
    oracle::Gen gen(8);
    for (int trial = 0; trial < 25; ++trial) {
        const auto x = gen.series(gen.size(2, 257));
        const auto bins = amplitude_spectrum(x, 10.0);
        const auto ref = oracle::dft_amplitudes(x);
        REQUIRE(bins.size() == x.size() / 2);
        double peak = 0.0;
        for (double r : ref) peak = std::max(peak, r);
        for (std::size_t k = 0; k < bins.size(); ++k) {
            REQUIRE(bins[k].frequency_hz == doctest::Approx((k + 1) * 10.0 / x.size()));
            REQUIRE(std::fabs(bins[k].amplitude - ref[k]) <= 1e-9 * std::max(1.0, peak));
        }
    }
}

TEST_CASE("pure in-bin sinusoid concentrates in one bin") {
    const std::size_t n = 200;
    const double A = 1.7;
    const auto x = sine(n, 0.5, 10.0, A);  // bin 10
    const auto bins = amplitude_spectrum(x, 10.0);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        if (k + 1 == 10) {
            CHECK(bins[k].amplitude == doctest::Approx(A * n / 2.0).epsilon(1e-12));
        } else {
            CHECK(bins[k].amplitude < 1e-9);
        }
    }
    for (const auto& b : amplitude_spectrum(std::vector<double>(64, 4.0), 10.0)) CHECK(b.amplitude < 1e-12);
    CHECK_THROWS_AS(amplitude_spectrum(std::vector<double>{1.0}, 10.0), DimensionError);
}

TEST_CASE("Parseval holds for the mean-removed series") {
    oracle::Gen gen(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = gen.series(gen.size(2, 300));
        const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
        double energy = 0.0;
        for (double v : x) energy += (v - m) * (v - m);
        const auto power = oracle::dft_power_two_sided(x);
        const double spectral = std::accumulate(power.begin(), power.end(), 0.0) / x.size();
        if (oracle::moments(x).std == 0.0) continue;
        CHECK(std::fabs(spectral - energy) / energy < 1e-9);

        // The library's one-sided bins carry the same energy.
        const auto bins = amplitude_spectrum(x, 1.0);
        double one_sided = 0.0;
        for (std::size_t k = 0; k < bins.size(); ++k) {
            const bool nyquist = x.size() % 2 == 0 && k + 1 == x.size() / 2;
            one_sided += (nyquist ? 1.0 : 2.0) * bins[k].amplitude * bins[k].amplitude;
        }
        CHECK(std::fabs(one_sided / x.size() - energy) / energy < 1e-9);
    }
}

TEST_CASE("heartbeats of a clean 1 Hz sinusoid") {
    const auto x = sine(600, 1.0, 10.0);
    const auto beats = detect_heartbeats(x, 10.0);
    CHECK(beats.size() >= 58);
    CHECK(beats.size() <= 61);
    std::vector<double> ibi;
    for (std::size_t i = 1; i < beats.size(); ++i) {
        REQUIRE(beats[i] - beats[i - 1] >= 0.4);
        ibi.push_back(beats[i] - beats[i - 1]);
    }
    std::nth_element(ibi.begin(), ibi.begin() + ibi.size() / 2, ibi.end());
    CHECK(std::fabs(ibi[ibi.size() / 2] - 1.0) <= 0.05);
}

TEST_CASE("heartbeat detector edge cases") {
    CHECK(detect_heartbeats(std::vector<double>(100, 0.0), 10.0).empty());
    CHECK_THROWS_AS(detect_heartbeats(std::vector<double>(49, 0.0), 10.0), DimensionError);
}

TEST_CASE("heartbeats of synthetic recordings") {
    synth::SynthConfig cfg;
    cfg.n_channels = 6;
    for (std::size_t p = 0; p < 3; ++p) {
        const auto s = synth::generate_recording(cfg, p);
        const auto beats = detect_heartbeats(s.recording.channel_mean(HemoglobinKind::oxy), 10.0);
        REQUIRE(beats.size() > 2);
        const double rate = static_cast<double>(beats.size() - 1) / (beats.back() - beats.front());
        CHECK(std::fabs(rate - cfg.heart_rate_hz) <= 0.1 * cfg.heart_rate_hz);
    }
}

TEST_CASE("cardiac wave spot values") {
    const std::vector<double> beats{1.0};
    const auto y = simulate_cardiac_wave(beats, 3.0, 10.0);
    REQUIRE(y.size() == 30);
    CHECK(y[10] == 1.0);
    CHECK(std::fabs(y[11] - std::exp(-2.0)) < 1e-12);  // 0.1 s = 2 sigma
    CHECK(y[13] == 0.0);                                // 6 sigma, past the 5 sigma support

    // 1.05 s is a sample instant at 20 Hz.
    const auto fine = simulate_cardiac_wave(beats, 3.0, 20.0);
    CHECK(std::fabs(fine[21] - 0.6065306597126334) < 1e-9);
    CHECK(fine[19] == doctest::Approx(fine[21]).epsilon(1e-12));

    for (double v : simulate_cardiac_wave({}, 3.0, 10.0)) CHECK(v == 0.0);
    CHECK_THROWS_AS(simulate_cardiac_wave(std::vector<double>{3.5}, 3.0, 10.0), RangeError);
    CHECK_THROWS_AS(simulate_cardiac_wave(std::vector<double>{-0.1}, 3.0, 10.0), RangeError);
}

TEST_CASE("cardiac wave matches the closed-form sum") {
    oracle::Gen gen(77);
    for (int trial = 0; trial < 30; ++trial) {
        const double duration = gen.uniform(5.0, 60.0);
        const double fs = gen.uniform(5.0, 100.0);
        std::vector<double> beats;
        for (double t = gen.uniform(0.0, 1.0); t <= duration; t += gen.uniform(0.05, 1.5)) beats.push_back(t);
        CardiacWaveConfig cfg{gen.uniform(0.1, 3.0), gen.uniform(0.01, 0.2), gen.uniform(1.0, 6.0)};
        const auto y = simulate_cardiac_wave(beats, duration, fs, cfg);
        const auto ref = oracle::gaussian_pulse_sum(beats, y.size(), fs, cfg.amplitude, cfg.sigma_s,
                                                   cfg.support_radius_sigmas);
        for (std::size_t i = 0; i < y.size(); ++i) {
            REQUIRE(std::fabs(y[i] - ref[i]) <= 1e-12);
            REQUIRE(y[i] >= 0.0);
        }
    }
}

TEST_CASE("heartbeats round-trip through the cardiac wave") {
    oracle::Gen gen(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> beats;
        for (double t = 2.0 + gen.uniform(0.0, 1.0); t < 58.0; t += gen.uniform(0.75, 1.1)) beats.push_back(t);
        const auto wave = simulate_cardiac_wave(beats, 60.0, 10.0);
        const auto found = detect_heartbeats(wave, 10.0);
        REQUIRE(found.size() == beats.size());
        for (std::size_t i = 0; i < beats.size(); ++i) REQUIRE(std::fabs(found[i] - beats[i]) <= 0.1 + 1e-12);
    }
}

TEST_CASE("band energy") {
    const auto x = sine(1000, 1.0, 10.0);
    const double inside = band_energy(x, 10.0, 0.8, 2.0);
    const double outside = band_energy(x, 10.0, 2.5, 5.0);
    CHECK(inside == doctest::Approx(500.0 * 500.0));
    CHECK(outside < 1e-12);
}

}  // TEST_SUITE
