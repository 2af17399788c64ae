#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "jamsig/rng.hpp"
#include "jamsig/tensor.hpp"

namespace jamsig {

// Dense layers operate on {N, features}; convolutional layers on
// {N, channels, length}. Each layer caches what its backward pass needs
// during forward, so forward -> backward must be called in pairs.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
};

class Dense : public Layer {
public:
    Dense(int in_features, int out_features);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override { return {&weight, &bias}; }
    std::vector<Tensor*> grads() override { return {&grad_weight, &grad_bias}; }

    Tensor weight;  // {out, in}
    Tensor bias;    // {out}
    Tensor grad_weight;
    Tensor grad_bias;

private:
    int in_features_;
    int out_features_;
    Tensor input_;
};

class Conv1d : public Layer {
public:
    Conv1d(int in_channels, int out_channels, int kernel, int stride, int pad);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override { return {&weight, &bias}; }
    std::vector<Tensor*> grads() override { return {&grad_weight, &grad_bias}; }

    int out_length(int in_length) const;

    Tensor weight;  // {out_ch, in_ch, kernel}
    Tensor bias;    // {out_ch}
    Tensor grad_weight;
    Tensor grad_bias;

private:
    int in_channels_, out_channels_, kernel_, stride_, pad_;
    Tensor input_;
};

class BatchNorm1d : public Layer {
public:
    explicit BatchNorm1d(int channels, double momentum = 0.1, double eps = 1e-5);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Tensor*> params() override { return {&gamma, &beta}; }
    std::vector<Tensor*> grads() override { return {&grad_gamma, &grad_beta}; }

    Tensor gamma, beta;
    Tensor grad_gamma, grad_beta;
    Tensor running_mean, running_var;  // updated in train mode, used in eval mode

private:
    int channels_;
    double momentum_, eps_;
    Tensor input_, x_hat_;
    std::vector<double> batch_mean_, batch_inv_std_;
};

class MaxPool1d : public Layer {
public:
    explicit MaxPool1d(int kernel = 2);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    int kernel_;
    std::vector<int> argmax_;
    std::vector<int> in_shape_;
};

class GlobalAvgPool1d : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    std::vector<int> in_shape_;
};

class Dropout : public Layer {
public:
    Dropout(double rate, std::uint64_t seed);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    double rate_;
    Rng rng_;
    std::vector<double> mask_;  // 0 or 1/(1-rate), refreshed each train forward
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Tensor input_;
};

class LeakyReLU : public Layer {
public:
    explicit LeakyReLU(double alpha = 0.2);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    double alpha_;
    Tensor input_;
};

class Sigmoid : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Tensor output_;
};

class Tanh : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Tensor output_;
};

// Trainable lookup table mapping class ids to dense vectors.
class Embedding {
public:
    Embedding(int num_entries, int dim);
    Tensor forward(const std::vector<int>& ids);  // {N, dim}
    void backward(const Tensor& grad_out);        // accumulates into grad_table
    std::vector<Tensor*> params() { return {&table}; }
    std::vector<Tensor*> grads() { return {&grad_table}; }

    Tensor table;  // {num_entries, dim}
    Tensor grad_table;

private:
    int num_entries_, dim_;
    std::vector<int> last_ids_;
};

class Sequential {
public:
    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& grad_out);
    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    std::size_t size() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

struct LossResult {
    double value = 0.0;
    Tensor grad;  // same shape as the prediction input
};

// Binary cross-entropy against a constant target, mean over the batch.
// Predictions clamp to [1e-7, 1 - 1e-7] before the logs.
LossResult bce_loss(const Tensor& pred, double target);

// Softmax cross-entropy, mean over the batch; grad = (softmax - onehot)/N.
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

Tensor softmax_rows(const Tensor& logits);

class Adam {
public:
    Adam(std::vector<Tensor*> params, std::vector<Tensor*> grads, double lr = 2e-4,
         double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void zero_grad();
    void step();
    double lr() const { return lr_; }

private:
    std::vector<Tensor*> params_;
    std::vector<Tensor*> grads_;
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

// Gaussian weight fill, N(mean, stddev).
void init_gaussian(Tensor& t, Rng& rng, double stddev = 0.02, double mean = 0.0);

struct WeightFile {
    std::map<std::string, Tensor> tensors;
    std::string meta_json;  // free-form JSON string stored alongside the tensors
};

// JWGT container: named float64 tensors plus a JSON metadata blob.
void write_weight_file(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, const Tensor*>>& tensors,
                       const std::string& meta_json);
WeightFile read_weight_file(const std::filesystem::path& path);

}  // namespace jamsig
