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
#include "fnirs/features.hpp"
#include "fnirs/synth.hpp"
#include "support/oracles.hpp"

using namespace fnirs;
using namespace fnirs::features;

namespace {

void check_moments(const MomentSet& got, const oracle::Moments& want, double rel) {
    auto close = [rel](double a, double b) { return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b)); };
    CHECK(close(got.mean, want.mean));
    CHECK(close(got.std, want.std));
    CHECK(close(got.skewness, want.skewness));
    CHECK(close(got.kurtosis, want.kurtosis));
}

std::vector<synth::Session> small_cohort(std::size_t participants, std::size_t channels) {
    synth::SynthConfig cfg;
    cfg.n_participants = participants;
    cfg.n_channels = channels;
    return synth::generate_cohort(cfg);
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("time moments of 1..5") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const MomentSet m = time_moments(x);
    CHECK(m.mean == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(m.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(std::fabs(m.skewness) < 1e-12);
    CHECK(m.kurtosis == doctest::Approx(1.7).epsilon(1e-9));
}

TEST_CASE("zero-variance convention") {
    const MomentSet c = time_moments(std::vector<double>(10, -4.25));
    CHECK(c.mean == -4.25);
    CHECK(c.std == 0.0);
    CHECK(c.skewness == 0.0);
    CHECK(c.kurtosis == 0.0);

    const MomentSet f = freq_moments(std::vector<double>(32, 7.0), 10.0);
    CHECK(f.mean == 0.0);
    CHECK(f.std == 0.0);
    CHECK(f.skewness == 0.0);
    CHECK(f.kurtosis == 0.0);

    CHECK_THROWS_AS(time_moments(std::vector<double>{1.0}), DimensionError);
    CHECK_THROWS_AS(freq_moments(std::vector<double>{1.0, 2.0, 3.0}, 10.0), DimensionError);
}

TEST_CASE("symmetric series have zero skewness") {
    oracle::Gen gen(2);
    for (int trial = 0; trial < 100; ++trial) {
        auto half = gen.normal_vector(gen.size(1, 100));
        const double c = gen.uniform(-10.0, 10.0);
        std::vector<double> x;
        for (double v : half) {
            x.push_back(c + v);
            x.push_back(c - v);
        }
        CHECK(std::fabs(time_moments(x).skewness) < 1e-12);
    }
}

TEST_CASE("time moments match the direct-summation oracle") {
    oracle::Gen gen(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = gen.series(gen.size(2, 400));
        check_moments(time_moments(x), oracle::moments(x), 1e-9);
    }
}

TEST_CASE("time moments are translation and scale covariant") {
    oracle::Gen gen(32);
    for (int trial = 0; trial < 200; ++trial) {
        auto x = gen.normal_vector(gen.size(3, 200));
        for (double& v : x) v = std::exp(v);  // skewed, so the invariants are not trivial
        const MomentSet base = time_moments(x);
        const double c = gen.uniform(-100.0, 100.0);
        const double a = std::exp(gen.uniform(-3.0, 3.0));
        std::vector<double> shifted(x.size()), scaled(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            shifted[i] = x[i] + c;
            scaled[i] = a * x[i];
        }
        const MomentSet s = time_moments(shifted), g = time_moments(scaled);
        CHECK(s.mean == doctest::Approx(base.mean + c).epsilon(1e-9));
        CHECK(s.std == doctest::Approx(base.std).epsilon(1e-9));
        CHECK(s.skewness == doctest::Approx(base.skewness).epsilon(1e-9).scale(1.0));
        CHECK(s.kurtosis == doctest::Approx(base.kurtosis).epsilon(1e-9));
        CHECK(g.mean == doctest::Approx(a * base.mean).epsilon(1e-9));
        CHECK(g.std == doctest::Approx(a * base.std).epsilon(1e-9));
        CHECK(g.skewness == doctest::Approx(base.skewness).epsilon(1e-9).scale(1.0));
        CHECK(g.kurtosis == doctest::Approx(base.kurtosis).epsilon(1e-9));
    }
}

TEST_CASE("frequency moments are moments of the amplitude sequence") {
    oracle::Gen gen(33);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = gen.normal_vector(gen.size(4, 300));
        std::vector<double> amps;
        for (const auto& b : dsp::amplitude_spectrum(x, 10.0)) amps.push_back(b.amplitude);
        const MomentSet f = freq_moments(x, 10.0), t = time_moments(amps);
        CHECK(f.mean == t.mean);
        CHECK(f.std == t.std);
        CHECK(f.skewness == t.skewness);
        CHECK(f.kurtosis == t.kurtosis);
        check_moments(f, oracle::moments(oracle::dft_amplitudes(x)), 1e-9);
    }
}

TEST_CASE("an in-bin sinusoid gives a heavy-tailed amplitude sequence") {
    const std::size_t n = 100;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * 7.0 * static_cast<double>(i) / n);
    const MomentSet f = freq_moments(x, 10.0);
    const auto ref = oracle::moments(oracle::dft_amplitudes(x));
    CHECK(f.kurtosis == doctest::Approx(ref.kurtosis).epsilon(1e-9));
    // A single non-zero value among M = N/2 gives kurtosis (M^2 - 3M + 3) / (M - 1).
    const double M = n / 2.0;
    CHECK(f.kurtosis == doctest::Approx((M * M - 3.0 * M + 3.0) / (M - 1.0)).epsilon(1e-6));
    CHECK(f.skewness > 5.0);
}

TEST_CASE("layout dimensions") {
    FeatureLayout layout;
    CHECK(layout.dimension(23) == 48);
    layout.channel_mode = ChannelMode::per_channel;
    CHECK(layout.dimension(23) == 1104);
    FeatureLayout small;
    small.sections = {3};
    small.domains = {FeatureDomain::time};
    small.signals = {HemoglobinKind::oxy};
    CHECK(small.dimension(23) == 4);
    CHECK(small.feature_names(23) ==
          std::vector<std::string>{"oxy_s3_time_mean", "oxy_s3_time_std", "oxy_s3_time_skewness", "oxy_s3_time_kurtosis"});

    FeatureLayout bad;
    bad.sections = {4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.domains.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(parse_channel_mode(to_string(ChannelMode::per_channel)) == ChannelMode::per_channel);
    CHECK(parse_feature_domain("frequency") == FeatureDomain::frequency);
    CHECK_THROWS_AS(parse_feature_domain("wavelet"), ConfigError);
}

TEST_CASE("feature names line up with values") {
    const auto cohort = small_cohort(1, 5);
    const auto& rec = cohort[0].recording;
    const auto windows = extract_task_windows(rec, cohort[0].schedule);
    const FeatureLayout layout;
    const auto v = window_features(rec, windows[7], layout);
    const auto names = layout.feature_names(rec.n_channels());
    REQUIRE(v.size() == names.size());
    CHECK(v == window_features(rec, windows[7], layout));

    const auto total = rec.channel_mean(HemoglobinKind::total);
    const auto sec = split_sections(windows[7])[1];
    const std::span<const double> part(total.data() + sec.begin, sec.size());
    const auto idx = std::find(names.begin(), names.end(), "total_s2_freq_std") - names.begin();
    CHECK(v[static_cast<std::size_t>(idx)] == freq_moments(part, 10.0).std);
    const auto idx2 = std::find(names.begin(), names.end(), "oxy_s1_time_kurtosis") - names.begin();
    const auto oxy = rec.channel_mean(HemoglobinKind::oxy);
    const auto s1 = split_sections(windows[7])[0];
    CHECK(v[static_cast<std::size_t>(idx2)] == time_moments(std::span<const double>(oxy.data() + s1.begin, s1.size())).kurtosis);
}

TEST_CASE("sub-layouts are slices of the full vector") {
    const auto cohort = small_cohort(1, 4);
    const auto& rec = cohort[0].recording;
    const auto w = extract_task_windows(rec, cohort[0].schedule)[2];
    const FeatureLayout full;
    const auto all = window_features(rec, w, full);
    const auto all_names = full.feature_names(4);
    for (int s : {1, 2, 3}) {
        FeatureLayout sub;
        sub.sections = {s};
        const auto part = window_features(rec, w, sub);
        const auto names = sub.feature_names(4);
        REQUIRE(part.size() == 16);
        for (std::size_t i = 0; i < part.size(); ++i) {
            const auto at = std::find(all_names.begin(), all_names.end(), names[i]) - all_names.begin();
            REQUIRE(at < static_cast<std::ptrdiff_t>(all.size()));
            CHECK(part[i] == all[static_cast<std::size_t>(at)]);
        }
    }
    // Layout order does not matter.
    FeatureLayout shuffled;
    shuffled.sections = {3, 1, 2};
    shuffled.signals = {HemoglobinKind::total, HemoglobinKind::oxy};
    CHECK(window_features(rec, w, shuffled) == all);
}

TEST_CASE("per-channel features") {
    const auto cohort = small_cohort(1, 3);
    const auto& rec = cohort[0].recording;
    const auto w = extract_task_windows(rec, cohort[0].schedule)[0];
    FeatureLayout layout;
    layout.channel_mode = ChannelMode::per_channel;
    const auto v = window_features(rec, w, layout);
    REQUIRE(v.size() == 3 * 48);
    CHECK(layout.feature_names(3)[48] == "ch02_oxy_s1_time_mean");
    const auto oxy = rec.series(1, HemoglobinKind::oxy);
    CHECK(v[48] == time_moments(std::span<const double>(oxy.data() + w.start_sample, 100)).mean);
}

TEST_CASE("dataset assembly") {
    const auto cohort = small_cohort(10, 23);
    const FeatureDataset ds = build_dataset(cohort, FeatureLayout{});
    CHECK(ds.rows() == 100);
    CHECK(ds.dims() == 48);
    CHECK(std::accumulate(ds.y.begin(), ds.y.end(), 0) == 50);
    CHECK(ds.groups[0] == "p00");
    CHECK(ds.groups[99] == "p09");
    CHECK(ds.part_index[13] == 3);
    CHECK(ds.columns == FeatureLayout{}.feature_names(23));
    CHECK(ds.X.allFinite());

    const FeatureDataset one = build_dataset(std::span(cohort).first(1), FeatureLayout{});
    CHECK(one.rows() == 10);
    CHECK(std::accumulate(one.y.begin(), one.y.end(), 0) == 5);

    CHECK_THROWS_AS(build_dataset(std::span<const synth::Session>{}, FeatureLayout{}), ConfigError);

    const FeatureDataset z = build_dataset(cohort, FeatureLayout{}, true);
    for (Eigen::Index j = 0; j < z.X.cols(); ++j) {
        CHECK(std::fabs(z.X.col(j).mean()) < 1e-9);
        CHECK(std::sqrt((z.X.col(j).array() - z.X.col(j).mean()).square().mean()) == doctest::Approx(1.0));
    }
}

TEST_CASE("per-channel datasets need matching channel counts") {
    auto cohort = small_cohort(1, 3);
    auto other = small_cohort(1, 4);
    cohort.push_back(other[0]);
    FeatureLayout layout;
    layout.channel_mode = ChannelMode::per_channel;
    CHECK_THROWS_AS(build_dataset(cohort, layout), ConfigError);
    CHECK_NOTHROW(build_dataset(cohort, FeatureLayout{}));
}

TEST_CASE("standardizer fits only the given rows") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 10, 3, 10, 100, -5, 200, 7;
    const std::vector<std::size_t> rows{0, 1};
    const Standardizer s = Standardizer::fit(X, rows);
    CHECK(s.mean(0) == 2.0);
    CHECK(s.scale(0) == 1.0);
    CHECK(s.scale(1) == 1.0);  // constant column keeps unit scale
    const Eigen::MatrixXd Z = s.apply(X);
    CHECK(Z(0, 0) == -1.0);
    CHECK(Z(2, 0) == 98.0);
    CHECK_THROWS_AS(Standardizer::fit(X, std::vector<std::size_t>{}), ConfigError);
}

TEST_CASE("subset keeps rows in the requested order") {
    const auto cohort = small_cohort(2, 3);
    const FeatureDataset ds = build_dataset(cohort, FeatureLayout{});
    const std::vector<std::size_t> idx{12, 3, 19};
    const FeatureDataset sub = ds.subset(idx);
    CHECK(sub.rows() == 3);
    CHECK(sub.X.row(0) == ds.X.row(12));
    CHECK(sub.groups == std::vector<std::string>{"p01", "p00", "p01"});
    CHECK(sub.y == std::vector<int>{ds.y[12], ds.y[3], ds.y[19]});
}

}  // TEST_SUITE
