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


#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fnirs/dsp.hpp"
#include "fnirs/features.hpp"
#include "fnirs/ica.hpp"
#include "fnirs/nn.hpp"
#include "fnirs/random.hpp"
#include "fnirs/synth.hpp"

using namespace fnirs;

namespace {

const synth::Session& one_session() {
    static const synth::Session session = [] {
        synth::SynthConfig cfg;
        cfg.n_participants = 1;
        return synth::generate_cohort(cfg).front();
    }();
    return session;
}

void BM_WindowFeatures(benchmark::State& state) {
    const auto& s = one_session();
    const auto windows = extract_task_windows(s.recording, s.schedule);
    const features::FeatureLayout layout;
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(features::window_features(s.recording, windows[i++ % windows.size()], layout));
}
BENCHMARK(BM_WindowFeatures);

void BM_ZeroPhaseFilter(benchmark::State& state) {
    const auto f = dsp::design_bandpass(0.001, 0.14, 10.0, 4);
    Rng rng(1);
    std::vector<double> x(static_cast<std::size_t>(state.range(0)));
    for (double& v : x) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(dsp::apply_zero_phase(f, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ZeroPhaseFilter)->Arg(5000)->Arg(60000);

void BM_FastIca(benchmark::State& state) {
    const auto& s = one_session();
    const auto& r = s.recording;
    ica::Matrix X(static_cast<Eigen::Index>(r.n_channels()), static_cast<Eigen::Index>(r.n_samples()));
    for (std::size_t c = 0; c < r.n_channels(); ++c)
        for (std::size_t i = 0; i < r.n_samples(); ++i)
            X(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) = r.channel(c).oxy[i];
    const auto white = ica::center_whiten(X);
    const ica::DenoiseConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(ica::fastica(white, cfg));
}
BENCHMARK(BM_FastIca)->Unit(benchmark::kMillisecond);

void BM_NetworkPredict(benchmark::State& state) {
    const nn::Network net(nn::NetworkSpec{}, 48, 0);
    Rng rng(2);
    Eigen::MatrixXd X(state.range(0), 48);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(net.predict_proba(X));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NetworkPredict)->Arg(1)->Arg(80);

}  // namespace

BENCHMARK_MAIN();
