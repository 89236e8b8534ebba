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


#include "support/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

using fnirs::nn::Mode;
using fnirs::nn::Tensor;

namespace oracle {
namespace {

Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> u(lo, hi);
    for (double& v : t.values()) v = u(rng);
    return t;
}

double weighted_sum(const Tensor& out, const Tensor& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * r[i];
    return s;
}

/// Checks `analytic` against central differences of `loss` in the
/// coordinates `which` of `leaf`.
GradCheck compare(std::string name, Tensor& leaf, const Tensor& analytic, const std::function<double()>& loss,
                  const std::vector<std::size_t>& which) {
    GradCheck c{std::move(name), 0.0, which.size()};
    for (std::size_t i : which) {
        const double x0 = leaf[i];
        leaf[i] = x0 + kGradStep;
        const double fp = loss();
        leaf[i] = x0 - kGradStep;
        const double fm = loss();
        leaf[i] = x0;
        const double numeric = (fp - fm) / (2.0 * kGradStep);
        const double scale = std::max({std::fabs(numeric), std::fabs(analytic[i]), kGradFloor});
        c.max_rel_error = std::max(c.max_rel_error, std::fabs(numeric - analytic[i]) / scale);
    }
    return c;
}

GradCheck compare_all(std::string name, Tensor& leaf, const Tensor& analytic, const std::function<double()>& loss) {
    std::vector<std::size_t> all(leaf.size());
    std::iota(all.begin(), all.end(), 0);
    return compare(std::move(name), leaf, analytic, loss, all);
}

// ELU has a kink in its second derivative at 0; keep samples off it so the
// central difference is not straddling it.
void push_off_zero(Tensor& t) {
    for (double& v : t.values())
        if (std::fabs(v) < 1e-3) v = v < 0 ? -1e-3 : 1e-3;
}

}  // namespace

std::vector<GradCheck> layer_gradient_checks(std::uint64_t seed) {
    namespace nn = fnirs::nn;
    std::mt19937_64 rng(seed);
    std::vector<GradCheck> out;

    {  // conv1d
        Tensor x = random_tensor(rng, {3, 9, 1}), k = random_tensor(rng, {4, 3}), b = random_tensor(rng, {4});
        const Tensor r = random_tensor(rng, {3, 7, 4});
        const auto g = nn::conv1d_backward(x, k, r);
        auto loss = [&] { return weighted_sum(nn::conv1d_forward(x, k, b), r); };
        out.push_back(compare_all("conv1d.input", x, g.input, loss));
        out.push_back(compare_all("conv1d.kernels", k, g.kernels, loss));
        out.push_back(compare_all("conv1d.bias", b, g.bias, loss));
    }
    {  // dense
        Tensor x = random_tensor(rng, {5, 6}), w = random_tensor(rng, {6, 4}), b = random_tensor(rng, {4});
        const Tensor r = random_tensor(rng, {5, 4});
        const auto g = nn::dense_backward(x, w, r);
        auto loss = [&] { return weighted_sum(nn::dense_forward(x, w, b), r); };
        out.push_back(compare_all("dense.input", x, g.input, loss));
        out.push_back(compare_all("dense.weight", w, g.weight, loss));
        out.push_back(compare_all("dense.bias", b, g.bias, loss));
    }
    for (Mode mode : {Mode::train, Mode::infer}) {
        for (bool spatial : {false, true}) {
            const std::string tag = std::string("batchnorm.") + (mode == Mode::train ? "train" : "infer") +
                                    (spatial ? ".3d" : ".2d");
            std::vector<std::size_t> shape = spatial ? std::vector<std::size_t>{4, 5, 3} : std::vector<std::size_t>{6, 5};
            const std::size_t f = shape.back();
            Tensor x = random_tensor(rng, shape, -2.0, 2.0);
            Tensor gamma = random_tensor(rng, {f}, 0.5, 2.0), beta = random_tensor(rng, {f});
            const Tensor rm = random_tensor(rng, {f}), rv = random_tensor(rng, {f}, 0.5, 2.0);
            const Tensor r = random_tensor(rng, shape);
            nn::BatchNormOptions opt;
            opt.update_running_stats = false;
            auto forward = [&](nn::BatchNormCache* cache) {
                Tensor m = rm, v = rv;
                return nn::batchnorm_forward(x, gamma, beta, m, v, mode, opt, cache);
            };
            nn::BatchNormCache cache;
            forward(&cache);
            const auto g = nn::batchnorm_backward(r, gamma, cache, mode);
            auto loss = [&] { return weighted_sum(forward(nullptr), r); };
            out.push_back(compare_all(tag + ".input", x, g.input, loss));
            out.push_back(compare_all(tag + ".gamma", gamma, g.gamma, loss));
            out.push_back(compare_all(tag + ".beta", beta, g.beta, loss));
        }
    }
    {  // elu, sigmoid
        Tensor x = random_tensor(rng, {4, 6}, -3.0, 3.0);
        push_off_zero(x);
        const Tensor r = random_tensor(rng, {4, 6});
        out.push_back(compare_all("elu", x, nn::elu_backward(x, r), [&] { return weighted_sum(nn::elu(x), r); }));
        Tensor x2 = x;
        out.push_back(compare_all("elu.alpha1.5", x2, nn::elu_backward(x2, r, 1.5),
                                  [&] { return weighted_sum(nn::elu(x2, 1.5), r); }));
        Tensor s = random_tensor(rng, {4, 6}, -4.0, 4.0);
        out.push_back(compare_all("sigmoid", s, nn::sigmoid_backward(nn::sigmoid(s), r),
                                  [&] { return weighted_sum(nn::sigmoid(s), r); }));
    }
    {  // dropout with a fixed mask
        Tensor x = random_tensor(rng, {5, 8});
        const Tensor r = random_tensor(rng, {5, 8});
        auto run = [&](Tensor* mask) {
            fnirs::Rng drng(seed ^ 0xd20);
            return nn::dropout(x, 0.4, Mode::train, drng, mask);
        };
        Tensor mask;
        run(&mask);
        Tensor analytic = r;
        for (std::size_t i = 0; i < analytic.size(); ++i) analytic[i] *= mask[i];
        out.push_back(compare_all("dropout", x, analytic, [&] { return weighted_sum(run(nullptr), r); }));
    }
    {  // bce, kept away from the clamp
        Tensor p = random_tensor(rng, {7, 1}, 0.05, 0.95);
        Tensor y({7, 1});
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i % 2);
        const auto g = nn::bce_loss(p, y);
        out.push_back(compare_all("bce", p, g.grad, [&] { return nn::bce_loss(p, y).loss; }));
    }
    return out;
}

std::vector<GradCheck> network_gradient_check(const fnirs::nn::NetworkSpec& spec, std::size_t input_dim,
                                              std::size_t batch, Mode mode, std::uint64_t seed,
                                              std::size_t coords_per_tensor) {
    namespace nn = fnirs::nn;
    std::mt19937_64 rng(seed);
    nn::Network net(spec, input_dim, seed);
    // Non-trivial running statistics and affine terms, so infer-mode checks
    // are not checking an identity.
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto& p : net.parameters().tensors) {
        if (p.name.ends_with(".running_mean") || p.name.ends_with(".beta") || p.name.ends_with(".bias")) {
            for (double& v : p.value.values()) v = u(rng);
        } else if (p.name.ends_with(".running_var") || p.name.ends_with(".gamma")) {
            for (double& v : p.value.values()) v = 1.0 + u(rng);
        }
    }
    const Tensor X = random_tensor(rng, {batch, input_dim}, -2.0, 2.0);
    Tensor y({batch, 1});
    for (std::size_t i = 0; i < batch; ++i) y[i] = static_cast<double>(i % 2);

    nn::Network::ForwardOptions opts;
    opts.mode = mode;
    opts.dropout = false;
    opts.update_running_stats = false;
    const auto lg = net.loss_and_gradients(X, y, opts);
    auto loss = [&] { return nn::bce_loss(net.forward(X, opts), y).loss; };

    std::vector<std::string> names;
    for (const auto& p : net.parameters().tensors)
        if (p.trainable) names.push_back(p.name);
    const auto leaves = net.trainable_tensors();

    std::vector<GradCheck> out;
    for (std::size_t t = 0; t < leaves.size(); ++t) {
        std::vector<std::size_t> which(leaves[t]->size());
        std::iota(which.begin(), which.end(), 0);
        if (coords_per_tensor > 0 && which.size() > coords_per_tensor) {
            std::shuffle(which.begin(), which.end(), rng);
            which.resize(coords_per_tensor);
        }
        out.push_back(compare("network." + names[t], *leaves[t], lg.gradients[t], loss, which));
    }
    return out;
}

}  // namespace oracle
