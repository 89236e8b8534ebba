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

#include "fnirs/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>

#include "fnirs/error.hpp"

namespace fnirs::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::RowVectorXd>;

std::size_t product(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& shape, const char* what) {
    if (t.shape() != shape) {
        throw DimensionError(std::string(what) + ": expected shape " + shape_string(shape) + ", got " +
                             shape_string(t.shape()));
    }
}

ConstMapMat as_matrix(const Tensor& t, std::size_t rows) {
    return ConstMapMat(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
}

MapMat as_matrix(Tensor& t, std::size_t rows) {
    return MapMat(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
}

Tensor reshaped(const Tensor& t, std::vector<std::size_t> shape) {
    return Tensor(std::move(shape), t.storage());
}

Tensor glorot(Rng& rng, std::vector<std::size_t> shape, double fan_in, double fan_out) {
    Tensor t(std::move(shape));
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.values()) v = rng.uniform(-limit, limit);
    return t;
}

}  // namespace

// ---- Tensor -------------------------------------------------------------------

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)), values_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
    if (values_.size() != product(shape_)) {
        throw DimensionError("tensor: " + std::to_string(values_.size()) + " values do not fill shape " +
                             shape_string(shape_));
    }
}

bool Tensor::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

// ---- configs --------------------------------------------------------------------

void NetworkSpec::validate() const {
    if (n_kernels == 0 || kernel_width == 0) throw ConfigError("network: conv needs kernels of positive width");
    if (dense_sizes.empty() || dense_sizes.back() != 1) throw ConfigError("network: last dense layer must have 1 unit");
    if (dropout_rates.size() + 1 != dense_sizes.size()) {
        throw ConfigError("network: need one dropout rate per hidden dense layer");
    }
    for (std::size_t s : dense_sizes)
        if (s == 0) throw ConfigError("network: dense sizes must be positive");
    for (double r : dropout_rates)
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("network: dropout rates must be in [0, 1)");
    if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw ConfigError("network: bn momentum must be in [0, 1)");
    if (!(bn_epsilon > 0.0)) throw ConfigError("network: bn epsilon must be positive");
    if (!(elu_alpha > 0.0)) throw ConfigError("network: elu alpha must be positive");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("train: beta1 and beta2 must be in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("train: epsilon must be positive");
    if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
}

// ---- layers -----------------------------------------------------------------------

Tensor conv1d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias) {
    if (x.rank() != 3 || x.dim(2) != 1) throw DimensionError("conv1d: input must be [batch, length, 1]");
    if (kernels.rank() != 2) throw DimensionError("conv1d: kernels must be [n_kernels, width]");
    const std::size_t batch = x.dim(0), len = x.dim(1), nk = kernels.dim(0), width = kernels.dim(1);
    require_shape(bias, {nk}, "conv1d bias");
    if (len < width) {
        throw DimensionError("conv1d: input length " + std::to_string(len) + " shorter than kernel width " +
                             std::to_string(width));
    }
    const std::size_t out_len = len - width + 1;
    Tensor y({batch, out_len, nk});
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = x.data() + b * len;
        for (std::size_t l = 0; l < out_len; ++l) {
            for (std::size_t k = 0; k < nk; ++k) {
                double acc = bias[k];
                for (std::size_t j = 0; j < width; ++j) acc += xb[l + j] * kernels.at(k, j);
                y.at(b, l, k) = acc;
            }
        }
    }
    return y;
}

Conv1dGradients conv1d_backward(const Tensor& x, const Tensor& kernels, const Tensor& grad_out) {
    const std::size_t batch = x.dim(0), len = x.dim(1), nk = kernels.dim(0), width = kernels.dim(1);
    const std::size_t out_len = len - width + 1;
    require_shape(grad_out, {batch, out_len, nk}, "conv1d grad");
    Conv1dGradients g{Tensor(x.shape()), Tensor(kernels.shape()), Tensor({nk})};
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = x.data() + b * len;
        double* dxb = g.input.data() + b * len;
        for (std::size_t l = 0; l < out_len; ++l) {
            for (std::size_t k = 0; k < nk; ++k) {
                const double d = grad_out.at(b, l, k);
                g.bias[k] += d;
                for (std::size_t j = 0; j < width; ++j) {
                    g.kernels.at(k, j) += d * xb[l + j];
                    dxb[l + j] += d * kernels.at(k, j);
                }
            }
        }
    }
    return g;
}

Tensor dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(0)) {
        throw DimensionError("dense: input " + shape_string(x.shape()) + " does not match weight " +
                             shape_string(weight.shape()));
    }
    require_shape(bias, {weight.dim(1)}, "dense bias");
    Tensor y({x.dim(0), weight.dim(1)});
    auto Y = as_matrix(y, x.dim(0));
    Y.noalias() = as_matrix(x, x.dim(0)) * as_matrix(weight, weight.dim(0));
    Y.rowwise() += ConstMapVec(bias.data(), static_cast<Eigen::Index>(bias.size()));
    return y;
}

DenseGradients dense_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out) {
    require_shape(grad_out, {x.dim(0), weight.dim(1)}, "dense grad");
    DenseGradients g{Tensor(x.shape()), Tensor(weight.shape()), Tensor({weight.dim(1)})};
    const auto X = as_matrix(x, x.dim(0));
    const auto D = as_matrix(grad_out, x.dim(0));
    as_matrix(g.weight, weight.dim(0)).noalias() = X.transpose() * D;
    as_matrix(g.input, x.dim(0)).noalias() = D * as_matrix(weight, weight.dim(0)).transpose();
    Eigen::Map<Eigen::RowVectorXd>(g.bias.data(), static_cast<Eigen::Index>(g.bias.size())) = D.colwise().sum();
    return g;
}

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                         Tensor& running_var, Mode mode, const BatchNormOptions& options, BatchNormCache* cache) {
    if (x.rank() < 2) throw DimensionError("batchnorm: input needs a batch axis and a feature axis");
    const std::size_t features = x.shape().back();
    const std::size_t rows = x.size() / features;
    for (const Tensor* t : {&gamma, &beta, static_cast<const Tensor*>(&running_mean), static_cast<const Tensor*>(&running_var)}) require_shape(*t, {features}, "batchnorm");
    if (mode == Mode::train && x.dim(0) < 2) throw DimensionError("batchnorm: train mode needs a batch of at least 2");

    Tensor y(x.shape());
    Tensor normalized(x.shape());
    Tensor inv_std({features});
    const auto X = as_matrix(x, rows);
    auto N = as_matrix(normalized, rows);
    Eigen::RowVectorXd mean(features), var(features);
    if (mode == Mode::train) {
        mean = X.colwise().mean();
        var = (X.rowwise() - mean).array().square().colwise().mean();
        if (options.update_running_stats) {
            const double unbias = static_cast<double>(rows) / static_cast<double>(rows - 1);
            for (std::size_t f = 0; f < features; ++f) {
                running_mean[f] = options.momentum * running_mean[f] + (1.0 - options.momentum) * mean(f);
                running_var[f] = options.momentum * running_var[f] + (1.0 - options.momentum) * var(f) * unbias;
            }
        }
    } else {
        mean = ConstMapVec(running_mean.data(), static_cast<Eigen::Index>(features));
        var = ConstMapVec(running_var.data(), static_cast<Eigen::Index>(features));
    }
    for (std::size_t f = 0; f < features; ++f) inv_std[f] = 1.0 / std::sqrt(var(f) + options.epsilon);
    const ConstMapVec istd(inv_std.data(), static_cast<Eigen::Index>(features));
    N = ((X.rowwise() - mean).array().rowwise() * istd.array()).matrix();
    auto Y = as_matrix(y, rows);
    Y = (N.array().rowwise() * ConstMapVec(gamma.data(), static_cast<Eigen::Index>(features)).array()).matrix();
    Y.rowwise() += ConstMapVec(beta.data(), static_cast<Eigen::Index>(features));
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

BatchNormGradients batchnorm_backward(const Tensor& grad_out, const Tensor& gamma, const BatchNormCache& cache,
                                      Mode mode) {
    const std::size_t features = grad_out.shape().back();
    const std::size_t rows = grad_out.size() / features;
    BatchNormGradients g{Tensor(grad_out.shape()), Tensor({features}), Tensor({features})};
    const auto D = as_matrix(grad_out, rows);
    const auto N = as_matrix(cache.normalized, rows);
    const Eigen::RowVectorXd sum_d = D.colwise().sum();
    const Eigen::RowVectorXd sum_dn = (D.array() * N.array()).colwise().sum();
    for (std::size_t f = 0; f < features; ++f) {
        g.beta[f] = sum_d(static_cast<Eigen::Index>(f));
        g.gamma[f] = sum_dn(static_cast<Eigen::Index>(f));
    }
    auto DX = as_matrix(g.input, rows);
    const double m = static_cast<double>(rows);
    for (std::size_t f = 0; f < features; ++f) {
        const auto j = static_cast<Eigen::Index>(f);
        const double scale = gamma[f] * cache.inv_std[f];
        if (mode == Mode::train) {
            DX.col(j) = (scale / m) * (m * D.col(j).array() - sum_d(j) - N.col(j).array() * sum_dn(j)).matrix();
        } else {
            DX.col(j) = scale * D.col(j);
        }
    }
    return g;
}

double elu(double x, double alpha) { return x > 0.0 ? x : alpha * std::expm1(x); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor elu(const Tensor& x, double alpha) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = elu(x[i], alpha);
    return y;
}

Tensor elu_backward(const Tensor& x, const Tensor& grad_out, double alpha) {
    Tensor g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = grad_out[i] * (x[i] > 0.0 ? 1.0 : alpha * std::exp(x[i]));
    return g;
}

Tensor sigmoid(const Tensor& x) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
    return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
    Tensor g(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * y[i] * (1.0 - y[i]);
    return g;
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng, Tensor* mask) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must be in [0, 1)");
    if (mode == Mode::infer || rate == 0.0) {
        if (mask) *mask = Tensor(x.shape(), 1.0);
        return x;
    }
    Tensor m(x.shape());
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& v : m.values()) v = rng.uniform() < rate ? 0.0 : keep_scale;
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * m[i];
    if (mask) *mask = std::move(m);
    return y;
}

BceResult bce_loss(const Tensor& p, const Tensor& y) {
    if (p.size() != y.size() || p.size() == 0) throw DimensionError("bce_loss: prediction/label size mismatch");
    constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
    const double n = static_cast<double>(p.size());
    BceResult r{0.0, Tensor(p.shape())};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], lo, hi);
        r.loss -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
        r.grad[i] = (q - y[i]) / (q * (1.0 - q)) / n;
    }
    r.loss /= n;
    return r;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const TrainConfig& config, std::size_t t) {
    if (t < 1) throw ConfigError("adam: step counter starts at 1");
    if (params.size() != grads.size()) throw DimensionError("adam: parameter/gradient count mismatch");
    if (state.m.empty()) {
        for (Tensor* p : params) {
            state.m.emplace_back(p->shape());
            state.v.emplace_back(p->shape());
        }
    }
    if (state.m.size() != params.size()) throw DimensionError("adam: state does not match parameters");
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        if (g.shape() != p.shape() || state.m[i].shape() != p.shape()) {
            throw DimensionError("adam: shape mismatch for parameter " + std::to_string(i));
        }
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
            v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            p[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

// ---- parameters ---------------------------------------------------------------------

const Tensor& ModelParameters::get(std::string_view name) const {
    for (const NamedTensor& t : tensors)
        if (t.name == name) return t.value;
    throw ConfigError("model: no parameter named '" + std::string(name) + "'");
}

Tensor& ModelParameters::get(std::string_view name) {
    return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::size_t ModelParameters::count(bool trainable_only) const {
    std::size_t n = 0;
    for (const NamedTensor& t : tensors)
        if (!trainable_only || t.trainable) n += t.value.size();
    return n;
}

// ---- network -------------------------------------------------------------------------

namespace {

struct ParamShape {
    std::string name;
    std::vector<std::size_t> shape;
    bool trainable;
};

std::vector<ParamShape> parameter_shapes(const NetworkSpec& spec, std::size_t input_dim) {
    spec.validate();
    if (input_dim < spec.kernel_width) {
        throw DimensionError("network: input dimension " + std::to_string(input_dim) + " shorter than kernel width");
    }
    std::vector<ParamShape> shapes;
    auto add_bn = [&](const std::string& prefix, std::size_t f) {
        shapes.push_back({prefix + ".gamma", {f}, true});
        shapes.push_back({prefix + ".beta", {f}, true});
        shapes.push_back({prefix + ".running_mean", {f}, false});
        shapes.push_back({prefix + ".running_var", {f}, false});
    };
    shapes.push_back({"conv.kernel", {spec.n_kernels, spec.kernel_width}, true});
    shapes.push_back({"conv.bias", {spec.n_kernels}, true});
    if (spec.batch_norm) add_bn("conv_bn", spec.n_kernels);
    std::size_t in = (input_dim - spec.kernel_width + 1) * spec.n_kernels;
    for (std::size_t i = 0; i < spec.dense_sizes.size(); ++i) {
        const std::string name = "dense" + std::to_string(i + 1);
        const std::size_t out = spec.dense_sizes[i];
        shapes.push_back({name + ".weight", {in, out}, true});
        shapes.push_back({name + ".bias", {out}, true});
        if (spec.batch_norm && i + 1 < spec.dense_sizes.size()) add_bn(name + "_bn", out);
        in = out;
    }
    return shapes;
}

}  // namespace

std::size_t Network::expected_parameter_count(const NetworkSpec& spec, std::size_t input_dim, bool trainable_only) {
    std::size_t n = 0;
    for (const ParamShape& p : parameter_shapes(spec, input_dim))
        if (!trainable_only || p.trainable) n += product(p.shape);
    return n;
}

Network::Network(NetworkSpec spec, std::size_t input_dim, std::uint64_t init_seed)
    : spec_(std::move(spec)), input_dim_(input_dim) {
    Rng rng = Rng::substream(init_seed, {0x1417});
    for (ParamShape& p : parameter_shapes(spec_, input_dim_)) {
        Tensor t(p.shape);
        if (p.name == "conv.kernel") {
            t = glorot(rng, p.shape, static_cast<double>(spec_.kernel_width),
                       static_cast<double>(spec_.kernel_width * spec_.n_kernels));
        } else if (p.name.ends_with(".weight")) {
            t = glorot(rng, p.shape, static_cast<double>(p.shape[0]), static_cast<double>(p.shape[1]));
        } else if (p.name.ends_with(".gamma") || p.name.ends_with(".running_var")) {
            t.fill(1.0);
        }
        params_.tensors.push_back({p.name, std::move(t), p.trainable});
    }
    index_parameters();
}

Network::Network(NetworkSpec spec, std::size_t input_dim, ModelParameters parameters)
    : spec_(std::move(spec)), input_dim_(input_dim), params_(std::move(parameters)) {
    const auto shapes = parameter_shapes(spec_, input_dim_);
    if (shapes.size() != params_.tensors.size()) {
        throw ConfigError("model: expected " + std::to_string(shapes.size()) + " parameter tensors, found " +
                          std::to_string(params_.tensors.size()));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        NamedTensor& t = params_.tensors[i];
        if (t.name != shapes[i].name) throw ConfigError("model: expected parameter '" + shapes[i].name + "', found '" + t.name + "'");
        require_shape(t.value, shapes[i].shape, shapes[i].name.c_str());
        if (!t.value.all_finite()) throw NumericError("model: parameter '" + t.name + "' is not finite");
        t.trainable = shapes[i].trainable;
    }
    index_parameters();
}

void Network::index_parameters() {
    auto slot = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < params_.tensors.size(); ++i)
            if (params_.tensors[i].name == name) return i;
        throw ConfigError("model: missing parameter '" + name + "'");
    };
    auto bn = [&](const std::string& prefix) {
        return BnSlots{slot(prefix + ".gamma"), slot(prefix + ".beta"), slot(prefix + ".running_mean"),
                       slot(prefix + ".running_var")};
    };
    conv_kernel_ = slot("conv.kernel");
    conv_bias_ = slot("conv.bias");
    if (spec_.batch_norm) conv_bn_ = bn("conv_bn");
    dense_weight_.clear();
    dense_bias_.clear();
    dense_bn_.clear();
    for (std::size_t i = 0; i < spec_.dense_sizes.size(); ++i) {
        const std::string name = "dense" + std::to_string(i + 1);
        dense_weight_.push_back(slot(name + ".weight"));
        dense_bias_.push_back(slot(name + ".bias"));
        const bool hidden = i + 1 < spec_.dense_sizes.size();
        dense_bn_.push_back(spec_.batch_norm && hidden ? std::optional(bn(name + "_bn")) : std::nullopt);
    }
}

struct Network::Trace {
    Tensor input;      // [B, D, 1]
    BatchNormCache conv_bn;
    Tensor conv_pre;   // pre-ELU, [B, L, K]
    struct Hidden {
        Tensor input;  // [B, in]
        BatchNormCache bn;
        Tensor pre;    // pre-ELU
        Tensor mask;
    };
    std::vector<Hidden> hidden;
    Tensor last_input;
    Tensor probabilities;
};

Tensor Network::run(const Tensor& X, const ForwardOptions& options, Trace* trace) {
    if (X.rank() != 2 || X.dim(1) != input_dim_) {
        throw DimensionError("network: expected input [batch, " + std::to_string(input_dim_) + "], got " +
                             shape_string(X.shape()));
    }
    const std::size_t batch = X.dim(0);
    if (options.mode == Mode::train && options.dropout && !options.rng) {
        throw ConfigError("network: train-mode dropout needs a random source");
    }
    auto& P = params_.tensors;
    const BatchNormOptions bn_opts{spec_.bn_momentum, spec_.bn_epsilon, options.update_running_stats};

    Tensor input = reshaped(X, {batch, input_dim_, 1});
    Tensor h = conv1d_forward(input, P[conv_kernel_].value, P[conv_bias_].value);
    const std::size_t conv_len = h.dim(1);
    if (conv_bn_) {
        BatchNormCache cache;
        h = batchnorm_forward(h, P[conv_bn_->gamma].value, P[conv_bn_->beta].value, P[conv_bn_->mean].value,
                              P[conv_bn_->var].value, options.mode, bn_opts, trace ? &cache : nullptr);
        if (trace) trace->conv_bn = std::move(cache);
    }
    if (trace) trace->conv_pre = h;
    h = reshaped(elu(h, spec_.elu_alpha), {batch, conv_len * spec_.n_kernels});
    if (trace) {
        trace->input = std::move(input);
        trace->hidden.clear();
    }

    const std::size_t n_dense = spec_.dense_sizes.size();
    for (std::size_t i = 0; i + 1 < n_dense; ++i) {
        Trace::Hidden step;
        Tensor z = dense_forward(h, P[dense_weight_[i]].value, P[dense_bias_[i]].value);
        if (dense_bn_[i]) {
            const BnSlots& s = *dense_bn_[i];
            z = batchnorm_forward(z, P[s.gamma].value, P[s.beta].value, P[s.mean].value, P[s.var].value, options.mode,
                                  bn_opts, trace ? &step.bn : nullptr);
        }
        Tensor a = elu(z, spec_.elu_alpha);
        const Mode drop_mode = options.dropout ? options.mode : Mode::infer;
        Rng dummy(0);
        Tensor out = dropout(a, spec_.dropout_rates[i], drop_mode, options.rng ? *options.rng : dummy,
                             trace ? &step.mask : nullptr);
        if (trace) {
            step.input = std::move(h);
            step.pre = std::move(z);
            trace->hidden.push_back(std::move(step));
        }
        h = std::move(out);
    }
    Tensor logits = dense_forward(h, P[dense_weight_.back()].value, P[dense_bias_.back()].value);
    Tensor p = sigmoid(logits);
    if (!p.all_finite()) throw NumericError("network: non-finite output");
    if (trace) {
        trace->last_input = std::move(h);
        trace->probabilities = p;
    }
    return p;
}

Tensor Network::forward(const Tensor& X, const ForwardOptions& options) { return run(X, options, nullptr); }

std::vector<double> Network::predict_proba(const Eigen::MatrixXd& X) const {
    Network copy = *this;  // infer mode does not touch state, but run() is non-const
    const Tensor p = copy.run(to_tensor(X), {Mode::infer, false, false, nullptr}, nullptr);
    return p.storage();
}

std::vector<Tensor*> Network::trainable_tensors() {
    std::vector<Tensor*> out;
    for (NamedTensor& t : params_.tensors)
        if (t.trainable) out.push_back(&t.value);
    return out;
}

Network::LossAndGradients Network::loss_and_gradients(const Tensor& X, const Tensor& y,
                                                      const ForwardOptions& options) {
    Trace trace;
    LossAndGradients out;
    out.probabilities = run(X, options, &trace);
    const BceResult bce = bce_loss(out.probabilities, y);
    out.loss = bce.loss;

    auto& P = params_.tensors;
    std::vector<Tensor> grads(P.size());
    const std::size_t n_dense = spec_.dense_sizes.size();

    Tensor d = sigmoid_backward(trace.probabilities, bce.grad);
    {
        DenseGradients g = dense_backward(trace.last_input, P[dense_weight_.back()].value, d);
        grads[dense_weight_.back()] = std::move(g.weight);
        grads[dense_bias_.back()] = std::move(g.bias);
        d = std::move(g.input);
    }
    for (std::size_t i = n_dense - 1; i-- > 0;) {
        Trace::Hidden& step = trace.hidden[i];
        for (std::size_t j = 0; j < d.size(); ++j) d[j] *= step.mask[j];
        d = elu_backward(step.pre, d, spec_.elu_alpha);
        if (dense_bn_[i]) {
            const BnSlots& s = *dense_bn_[i];
            BatchNormGradients g = batchnorm_backward(d, P[s.gamma].value, step.bn, options.mode);
            grads[s.gamma] = std::move(g.gamma);
            grads[s.beta] = std::move(g.beta);
            d = std::move(g.input);
        }
        DenseGradients g = dense_backward(step.input, P[dense_weight_[i]].value, d);
        grads[dense_weight_[i]] = std::move(g.weight);
        grads[dense_bias_[i]] = std::move(g.bias);
        d = std::move(g.input);
    }
    d = reshaped(d, trace.conv_pre.shape());
    d = elu_backward(trace.conv_pre, d, spec_.elu_alpha);
    if (conv_bn_) {
        BatchNormGradients g = batchnorm_backward(d, P[conv_bn_->gamma].value, trace.conv_bn, options.mode);
        grads[conv_bn_->gamma] = std::move(g.gamma);
        grads[conv_bn_->beta] = std::move(g.beta);
        d = std::move(g.input);
    }
    Conv1dGradients g = conv1d_backward(trace.input, P[conv_kernel_].value, d);
    grads[conv_kernel_] = std::move(g.kernels);
    grads[conv_bias_] = std::move(g.bias);

    for (std::size_t i = 0; i < P.size(); ++i) {
        if (!P[i].trainable) continue;
        if (!grads[i].all_finite()) throw NumericError("network: non-finite gradient for " + P[i].name);
        out.gradients.push_back(std::move(grads[i]));
    }
    return out;
}

Tensor to_tensor(const Eigen::MatrixXd& X) {
    Tensor t({static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(X.cols())});
    as_matrix(t, static_cast<std::size_t>(X.rows())) = X;
    return t;
}

TrainResult train(const NetworkSpec& spec, const Eigen::MatrixXd& X, std::span<const int> y,
                  const TrainConfig& config) {
    spec.validate();
    config.validate();
    const std::size_t n = static_cast<std::size_t>(X.rows());
    if (n == 0) throw ConfigError("train: empty training split");
    if (y.size() != n) throw DimensionError("train: label count does not match rows");
    if (spec.batch_norm && n < 2) throw ConfigError("train: batch norm needs at least 2 training samples");
    if (!X.allFinite()) throw NumericError("train: non-finite features");

    Network model(spec, static_cast<std::size_t>(X.cols()), derive_seed(config.seed, {1}));
    Rng shuffle_rng = Rng::substream(config.seed, {2});
    Rng dropout_rng = Rng::substream(config.seed, {3});

    // Batch boundaries; a trailing singleton joins the previous batch.
    std::vector<std::size_t> bounds;
    for (std::size_t b = 0; b < n; b += config.batch_size) bounds.push_back(b);
    if (spec.batch_norm && bounds.size() > 1 && n - bounds.back() == 1) bounds.pop_back();
    bounds.push_back(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    AdamState adam;
    std::size_t step = 0;
    TrainResult result{model, {}};
    Network& net = result.model;
    auto trainables = net.trainable_tensors();
    const Network::ForwardOptions opts{Mode::train, true, true, &dropout_rng};

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) shuffle_rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
            const std::size_t lo = bounds[b], hi = bounds[b + 1];
            Tensor xb({hi - lo, static_cast<std::size_t>(X.cols())});
            Tensor yb({hi - lo, 1});
            for (std::size_t i = lo; i < hi; ++i) {
                const auto r = static_cast<Eigen::Index>(order[i]);
                for (Eigen::Index j = 0; j < X.cols(); ++j) xb.at(i - lo, static_cast<std::size_t>(j)) = X(r, j);
                yb[i - lo] = static_cast<double>(y[order[i]]);
            }
            auto lg = net.loss_and_gradients(xb, yb, opts);
            adam_step(trainables, lg.gradients, adam, config, ++step);
            epoch_loss += lg.loss * static_cast<double>(hi - lo);
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) throw NumericError("train: loss became non-finite at epoch " + std::to_string(epoch));
        result.loss_curve.push_back(epoch_loss);
    }
    return result;
}

std::vector<int> threshold_labels(std::span<const double> probabilities, double threshold) {
    std::vector<int> labels;
    labels.reserve(probabilities.size());
    for (double p : probabilities) labels.push_back(p >= threshold ? 1 : 0);
    return labels;
}

std::vector<int> predict(const Network& model, const Eigen::MatrixXd& X, double threshold) {
    return threshold_labels(model.predict_proba(X), threshold);
}

double accuracy(std::span<const int> labels, std::span<const int> truth) {
    if (labels.size() != truth.size()) throw DimensionError("accuracy: label count mismatch");
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == truth[i];
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace fnirs::nn
