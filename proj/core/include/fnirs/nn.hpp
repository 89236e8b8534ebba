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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnirs/random.hpp"

namespace fnirs::nn {

/// Dense row-major array of doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return values_.size(); }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double> storage() const { return {values_.begin(), values_.end()}; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return values_[i * shape_[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return values_[(i * shape_[1] + j) * shape_[2] + k]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * shape_[1] + j) * shape_[2] + k];
    }

    bool all_finite() const;
    void fill(double v);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    // Eigen's vectorized kernels round differently depending on where the
    // data starts, so unaligned storage would make training results depend
    // on the heap layout.
    std::vector<double, Eigen::aligned_allocator<double>> values_;
};

enum class Mode { train, infer };

/// Convolutional feature extractor followed by a dense classifier:
/// conv -> BN -> ELU -> flatten -> [dense -> BN -> ELU -> dropout] x N -> dense -> sigmoid.
struct NetworkSpec {
    std::size_t n_kernels = 10;
    std::size_t kernel_width = 3;
    std::vector<std::size_t> dense_sizes{256, 16, 4, 1};
    std::vector<double> dropout_rates{0.6, 0.4, 0.2};
    bool batch_norm = true;
    double bn_momentum = 0.9;
    double bn_epsilon = 1e-5;
    double elu_alpha = 1.0;

    void validate() const;
    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct TrainConfig {
    double learning_rate = 0.0002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 500;
    std::size_t batch_size = 20;
    std::uint64_t seed = 0;
    bool shuffle = true;

    void validate() const;
};

// ---- layer primitives -------------------------------------------------------

/// Valid cross-correlation: x [batch, length, 1], kernels [n_kernels, width],
/// bias [n_kernels] -> [batch, length - width + 1, n_kernels].
Tensor conv1d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias);

struct Conv1dGradients {
    Tensor input, kernels, bias;
};
Conv1dGradients conv1d_backward(const Tensor& x, const Tensor& kernels, const Tensor& grad_out);

/// x [batch, in], weight [in, out], bias [out].
Tensor dense_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct DenseGradients {
    Tensor input, weight, bias;
};
DenseGradients dense_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_out);

struct BatchNormOptions {
    double momentum = 0.9;
    double epsilon = 1e-5;
    bool update_running_stats = true;
};

struct BatchNormCache {
    Tensor normalized;
    Tensor inv_std;  // per feature
};

/// Normalizes over every axis but the last. Train mode uses batch statistics
/// (and folds them into the running estimates); infer mode uses the running
/// estimates. Train mode needs batch >= 2.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                         Tensor& running_var, Mode mode, const BatchNormOptions& options = {},
                         BatchNormCache* cache = nullptr);

struct BatchNormGradients {
    Tensor input, gamma, beta;
};
BatchNormGradients batchnorm_backward(const Tensor& grad_out, const Tensor& gamma, const BatchNormCache& cache,
                                      Mode mode);

double elu(double x, double alpha = 1.0);
double sigmoid(double x);
Tensor elu(const Tensor& x, double alpha = 1.0);
Tensor elu_backward(const Tensor& x, const Tensor& grad_out, double alpha = 1.0);
Tensor sigmoid(const Tensor& x);
/// Takes the sigmoid output, not its input.
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

/// Inverted dropout; the identity in infer mode. `mask` receives the
/// per-element multiplier (0 or 1 / (1 - rate)).
Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng, Tensor* mask = nullptr);

struct BceResult {
    double loss;
    Tensor grad;  // d loss / d p
};

/// Mean binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
BceResult bce_loss(const Tensor& p, const Tensor& y);

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

/// One Adam update at step t >= 1. State tensors are created on first use.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const TrainConfig& config, std::size_t t);

// ---- network ------------------------------------------------------------------

struct NamedTensor {
    std::string name;
    Tensor value;
    bool trainable = true;
};

struct ModelParameters {
    static constexpr int kFormatVersion = 1;
    std::vector<NamedTensor> tensors;

    const Tensor& get(std::string_view name) const;
    Tensor& get(std::string_view name);
    std::size_t count(bool trainable_only = false) const;
};

class Network {
public:
    /// Fresh model with seeded fan-based uniform initialization.
    Network(NetworkSpec spec, std::size_t input_dim, std::uint64_t init_seed);
    /// Model from stored parameters; shapes are checked against `spec`.
    Network(NetworkSpec spec, std::size_t input_dim, ModelParameters parameters);

    const NetworkSpec& spec() const { return spec_; }
    std::size_t input_dim() const { return input_dim_; }
    const ModelParameters& parameters() const { return params_; }
    ModelParameters& parameters() { return params_; }

    static std::size_t expected_parameter_count(const NetworkSpec& spec, std::size_t input_dim,
                                                bool trainable_only = false);

    struct ForwardOptions {
        Mode mode = Mode::infer;
        bool dropout = true;
        bool update_running_stats = true;
        Rng* rng = nullptr;  // required for train-mode dropout
    };

    /// Probabilities [batch, 1] for inputs [batch, input_dim].
    Tensor forward(const Tensor& X, const ForwardOptions& options);

    /// Inference only; never mutates the model.
    std::vector<double> predict_proba(const Eigen::MatrixXd& X) const;

    struct LossAndGradients {
        double loss = 0.0;
        Tensor probabilities;
        std::vector<Tensor> gradients;  // aligned with trainable_tensors()
    };
    LossAndGradients loss_and_gradients(const Tensor& X, const Tensor& y, const ForwardOptions& options);

    /// Pointers to trainable tensors, in parameter order.
    std::vector<Tensor*> trainable_tensors();

private:
    struct Trace;
    Tensor run(const Tensor& X, const ForwardOptions& options, Trace* trace);

    void index_parameters();

    NetworkSpec spec_;
    std::size_t input_dim_;
    ModelParameters params_;

    struct BnSlots {
        std::size_t gamma, beta, mean, var;
    };
    std::size_t conv_kernel_ = 0, conv_bias_ = 0;
    std::optional<BnSlots> conv_bn_;
    std::vector<std::size_t> dense_weight_, dense_bias_;
    std::vector<std::optional<BnSlots>> dense_bn_;
};

Tensor to_tensor(const Eigen::MatrixXd& X);

struct TrainResult {
    Network model;
    std::vector<double> loss_curve;  // mean training loss per epoch
};

/// Mini-batch Adam training, deterministic in config.seed. A trailing batch
/// of one sample is merged into the previous batch (batch norm needs >= 2).
TrainResult train(const NetworkSpec& spec, const Eigen::MatrixXd& X, std::span<const int> y,
                  const TrainConfig& config);

/// label = 1 iff probability >= threshold.
std::vector<int> threshold_labels(std::span<const double> probabilities, double threshold = 0.5);
std::vector<int> predict(const Network& model, const Eigen::MatrixXd& X, double threshold = 0.5);
double accuracy(std::span<const int> labels, std::span<const int> truth);

}  // namespace fnirs::nn
