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

#include "fnirs/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "fnirs/error.hpp"

namespace fnirs::dsp {
namespace {

using cplx = std::complex<double>;

std::vector<double> poly_multiply(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

cplx section_response(const Biquad& s, cplx zinv) {
    const cplx zinv2 = zinv * zinv;
    return (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
}

// Transposed direct form II state per section.
struct SectionState {
    double z0 = 0.0;
    double z1 = 0.0;
};

std::vector<SectionState> steady_state(const FilterSpec& f, double x0) {
    std::vector<SectionState> zi(f.sections.size());
    double level = x0;
    for (std::size_t i = 0; i < f.sections.size(); ++i) {
        const Biquad& s = f.sections[i];
        const double y = level * (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        zi[i].z1 = s.b2 * level - s.a2 * y;
        zi[i].z0 = s.b1 * level - s.a1 * y + zi[i].z1;
        level = y;
    }
    return zi;
}

void run_cascade(const FilterSpec& f, std::vector<double>& x, std::vector<SectionState> state) {
    for (std::size_t i = 0; i < f.sections.size(); ++i) {
        const Biquad& s = f.sections[i];
        SectionState st = state[i];
        for (double& v : x) {
            const double in = v;
            const double y = s.b0 * in + st.z0;
            st.z0 = s.b1 * in - s.a1 * y + st.z1;
            st.z1 = s.b2 * in - s.a2 * y;
            v = y;
        }
    }
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::vector<double> FilterSpec::feedforward() const {
    std::vector<double> p{1.0};
    for (const Biquad& s : sections) p = poly_multiply(p, {s.b0, s.b1, s.b2});
    return p;
}

std::vector<double> FilterSpec::feedback() const {
    std::vector<double> p{1.0};
    for (const Biquad& s : sections) p = poly_multiply(p, {1.0, s.a1, s.a2});
    return p;
}

std::complex<double> FilterSpec::response(double frequency_hz) const {
    const double w = 2.0 * std::numbers::pi * frequency_hz / sampling_rate_hz;
    const cplx zinv = std::polar(1.0, -w);
    cplx h = 1.0;
    for (const Biquad& s : sections) h *= section_response(s, zinv);
    return h;
}

double FilterSpec::gain_db(double frequency_hz) const {
    return 20.0 * std::log10(std::abs(response(frequency_hz)));
}

bool FilterSpec::is_stable() const {
    for (const Biquad& s : sections) {
        // Roots of z^2 + a1 z + a2.
        const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
        const cplx r1 = (-s.a1 + disc) / 2.0;
        const cplx r2 = (-s.a1 - disc) / 2.0;
        if (!(std::abs(r1) < 1.0) || !(std::abs(r2) < 1.0)) return false;
    }
    return true;
}

FilterSpec design_bandpass(double low_cut_hz, double high_cut_hz, double sampling_rate_hz, int order) {
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz)) {
        throw ConfigError("design_bandpass: sampling rate must be positive");
    }
    if (!(low_cut_hz > 0.0 && low_cut_hz < high_cut_hz && high_cut_hz < sampling_rate_hz / 2.0)) {
        throw ConfigError("design_bandpass: need 0 < low (" + std::to_string(low_cut_hz) + ") < high (" +
                          std::to_string(high_cut_hz) + ") < Nyquist (" + std::to_string(sampling_rate_hz / 2.0) +
                          ")");
    }
    if (order < 1 || order > 16) throw ConfigError("design_bandpass: order must be in [1, 16]");

    const double pi = std::numbers::pi;
    const double fs2 = 2.0 * sampling_rate_hz;
    const double wl = fs2 * std::tan(pi * low_cut_hz / sampling_rate_hz);
    const double wh = fs2 * std::tan(pi * high_cut_hz / sampling_rate_hz);
    const double bw = wh - wl;
    const double w0 = std::sqrt(wl * wh);

    // Analog low-pass prototype -> band-pass -> bilinear.
    std::vector<cplx> poles;
    for (int k = 0; k < order; ++k) {
        const double theta = pi * (2.0 * k + order + 1.0) / (2.0 * order);
        const cplx p = std::polar(1.0, theta);
        const cplx half = p * (bw / 2.0);
        const cplx root = std::sqrt(half * half - w0 * w0);
        for (const cplx s : {half + root, half - root}) poles.push_back((fs2 + s) / (fs2 - s));
    }

    std::vector<cplx> upper;
    std::vector<double> real;
    for (const cplx& p : poles) {
        if (std::abs(p.imag()) > 1e-14 * std::abs(p)) {
            if (p.imag() > 0) upper.push_back(p);
        } else {
            real.push_back(p.real());
        }
    }
    std::sort(real.begin(), real.end());
    if (real.size() % 2 != 0) throw NumericError("design_bandpass: unpaired real pole");

    FilterSpec spec;
    spec.low_cut_hz = low_cut_hz;
    spec.high_cut_hz = high_cut_hz;
    spec.sampling_rate_hz = sampling_rate_hz;
    spec.order = order;
    for (const cplx& p : upper) spec.sections.push_back({1.0, 0.0, -1.0, -2.0 * p.real(), std::norm(p)});
    for (std::size_t i = 0; i < real.size(); i += 2) {
        spec.sections.push_back({1.0, 0.0, -1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
    }

    // Unit gain per section at the digital image of the analog centre.
    const double wc = 2.0 * std::atan(w0 / fs2);
    const cplx zinv = std::polar(1.0, -wc);
    for (Biquad& s : spec.sections) {
        const double g = 1.0 / std::abs(section_response(s, zinv));
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
    }

    if (!spec.is_stable()) throw NumericError("design_bandpass: designed filter is unstable");
    for (const Biquad& s : spec.sections) {
        for (double c : {s.b0, s.b1, s.b2, s.a1, s.a2}) {
            if (!std::isfinite(c)) throw NumericError("design_bandpass: non-finite coefficient");
        }
    }
    return spec;
}

std::vector<double> apply_causal(const FilterSpec& filter, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    run_cascade(filter, y, std::vector<SectionState>(filter.sections.size()));
    return y;
}

std::vector<double> apply_zero_phase(const FilterSpec& filter, std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t pad = filter.pad_length();
    if (n <= pad) {
        throw DimensionError("apply_zero_phase: series of " + std::to_string(n) + " samples must exceed the " +
                             std::to_string(pad) + "-sample edge padding");
    }
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    run_cascade(filter, ext, steady_state(filter, ext.front()));
    std::reverse(ext.begin(), ext.end());
    run_cascade(filter, ext, steady_state(filter, ext.front()));
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.end() - static_cast<std::ptrdiff_t>(pad)};
}

std::vector<SpectrumBin> amplitude_spectrum(std::span<const double> x, double sampling_rate_hz) {
    const std::size_t n = x.size();
    if (n < 2) throw DimensionError("amplitude_spectrum: need at least 2 samples");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) in[i] = x[i] - mean;
    fftw_execute(plan);

    std::vector<SpectrumBin> bins;
    bins.reserve(n / 2);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        bins.push_back({static_cast<double>(k) * sampling_rate_hz / static_cast<double>(n),
                        std::hypot(out[k][0], out[k][1])});
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return bins;
}

double band_energy(std::span<const double> x, double sampling_rate_hz, double low_hz, double high_hz) {
    double e = 0.0;
    for (const SpectrumBin& b : amplitude_spectrum(x, sampling_rate_hz)) {
        if (b.frequency_hz >= low_hz && b.frequency_hz <= high_hz) e += b.amplitude * b.amplitude;
    }
    return e;
}

std::vector<double> detect_heartbeats(std::span<const double> x, double sampling_rate_hz,
                                      const HeartbeatDetector& detector) {
    const std::size_t n = x.size();
    if (static_cast<double>(n) < detector.min_duration_s * sampling_rate_hz) {
        throw DimensionError("detect_heartbeats: need at least " + std::to_string(detector.min_duration_s) +
                             " s of samples");
    }
    const FilterSpec band = design_bandpass(detector.low_cut_hz, detector.high_cut_hz, sampling_rate_hz, 4);
    const std::vector<double> y = apply_zero_phase(band, x);

    // Centred rolling standard deviation via prefix sums.
    const std::size_t half = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::round(detector.rolling_window_s * sampling_rate_hz / 2.0)));
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + y[i];
        s2[i + 1] = s2[i] + y[i] * y[i];
    }

    const double floor = detector.global_floor_fraction * std::sqrt(s2[n] / static_cast<double>(n));

    struct Peak {
        double time_s;
        double height;
    };
    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0.0)) continue;
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        const double m = static_cast<double>(hi - lo);
        const double mean = (s1[hi] - s1[lo]) / m;
        const double var = std::max(0.0, (s2[hi] - s2[lo]) / m - mean * mean);
        if (!(y[i] > detector.threshold_fraction * std::sqrt(var)) || !(y[i] > floor)) continue;

        const double curvature = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double offset = 0.0;
        if (detector.subsample_refinement && curvature < 0.0) offset = std::clamp(0.5 * (y[i - 1] - y[i + 1]) / curvature, -0.5, 0.5);
        const Peak p{(static_cast<double>(i) + offset) / sampling_rate_hz, y[i]};

        if (!peaks.empty() && p.time_s - peaks.back().time_s < detector.refractory_s) {
            if (p.height > peaks.back().height) peaks.back() = p;
            continue;
        }
        peaks.push_back(p);
    }

    std::vector<double> beats;
    beats.reserve(peaks.size());
    for (const Peak& p : peaks) beats.push_back(p.time_s);
    return beats;
}

std::vector<double> simulate_cardiac_wave(std::span<const double> beat_times_s, double duration_s,
                                          double sampling_rate_hz, const CardiacWaveConfig& config) {
    if (!(config.sigma_s > 0.0) || !(config.amplitude > 0.0) || !(config.support_radius_sigmas > 0.0)) {
        throw ConfigError("cardiac wave: sigma, amplitude and support radius must be positive");
    }
    if (!(sampling_rate_hz > 0.0) || !(duration_s >= 0.0)) throw ConfigError("cardiac wave: invalid duration or rate");
    for (double t : beat_times_s) {
        if (!(t >= 0.0 && t <= duration_s)) {
            throw RangeError("cardiac wave: beat at " + std::to_string(t) + " s lies outside [0, " +
                             std::to_string(duration_s) + "] s");
        }
    }
    const auto n = static_cast<std::size_t>(std::round(duration_s * sampling_rate_hz));
    std::vector<double> y(n, 0.0);
    const double radius = config.support_radius_sigmas * config.sigma_s;
    const double inv_two_var = 1.0 / (2.0 * config.sigma_s * config.sigma_s);
    for (double tk : beat_times_s) {
        const double first = std::ceil((tk - radius) * sampling_rate_hz);
        const double last = std::floor((tk + radius) * sampling_rate_hz);
        const auto i0 = static_cast<std::ptrdiff_t>(std::max(0.0, first));
        const auto i1 = static_cast<std::ptrdiff_t>(std::min(static_cast<double>(n) - 1.0, last));
        for (std::ptrdiff_t i = i0; i <= i1; ++i) {
            const double dt = static_cast<double>(i) / sampling_rate_hz - tk;
            if (std::abs(dt) > radius) continue;
            y[static_cast<std::size_t>(i)] += config.amplitude * std::exp(-dt * dt * inv_two_var);
        }
    }
    return y;
}

}  // namespace fnirs::dsp
