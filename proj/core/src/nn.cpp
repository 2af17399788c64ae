#include "jamsig/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "jamsig/binio.hpp"

namespace jamsig {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

void require_ndim(const Tensor& x, int ndim, const char* what) {
    if (x.ndim() != ndim) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(ndim) +
                                    "-d input, got shape " + x.shape_str());
    }
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(int in_features, int out_features)
    : weight(Tensor::zeros({out_features, in_features})),
      bias(Tensor::zeros({out_features})),
      grad_weight(Tensor::zeros({out_features, in_features})),
      grad_bias(Tensor::zeros({out_features})),
      in_features_(in_features),
      out_features_(out_features) {
    if (in_features <= 0 || out_features <= 0) {
        throw std::invalid_argument("Dense: feature counts must be positive");
    }
}

Tensor Dense::forward(const Tensor& x, bool) {
    require_ndim(x, 2, "Dense");
    if (x.dim(1) != in_features_) {
        throw std::invalid_argument("Dense: input width " + std::to_string(x.dim(1)) +
                                    " != " + std::to_string(in_features_));
    }
    input_ = x;
    const int n = x.dim(0);
    Tensor y({n, out_features_});
    MapConstMat xm(x.data.data(), n, in_features_);
    MapConstMat wm(weight.data.data(), out_features_, in_features_);
    MapMat ym(y.data.data(), n, out_features_);
    ym.noalias() = xm * wm.transpose();
    ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data.data(), out_features_);
    return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
    require_ndim(grad_out, 2, "Dense backward");
    const int n = input_.dim(0);
    MapConstMat gom(grad_out.data.data(), n, out_features_);
    MapConstMat xm(input_.data.data(), n, in_features_);
    MapConstMat wm(weight.data.data(), out_features_, in_features_);

    MapMat gwm(grad_weight.data.data(), out_features_, in_features_);
    gwm.noalias() += gom.transpose() * xm;
    Eigen::Map<Eigen::VectorXd> gbm(grad_bias.data.data(), out_features_);
    gbm.noalias() += gom.colwise().sum().transpose();

    Tensor grad_in({n, in_features_});
    MapMat gim(grad_in.data.data(), n, in_features_);
    gim.noalias() = gom * wm;
    return grad_in;
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(int in_channels, int out_channels, int kernel, int stride, int pad)
    : weight(Tensor::zeros({out_channels, in_channels, kernel})),
      bias(Tensor::zeros({out_channels})),
      grad_weight(Tensor::zeros({out_channels, in_channels, kernel})),
      grad_bias(Tensor::zeros({out_channels})),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad) {
    if (in_channels <= 0 || out_channels <= 0 || kernel <= 0 || stride <= 0 || pad < 0) {
        throw std::invalid_argument("Conv1d: invalid geometry");
    }
}

int Conv1d::out_length(int in_length) const {
    const int padded = in_length + 2 * pad_ - kernel_;
    if (padded < 0) throw std::invalid_argument("Conv1d: input shorter than kernel");
    return padded / stride_ + 1;
}

Tensor Conv1d::forward(const Tensor& x, bool) {
    require_ndim(x, 3, "Conv1d");
    if (x.dim(1) != in_channels_) {
        throw std::invalid_argument("Conv1d: channel mismatch, got " + x.shape_str());
    }
    input_ = x;
    const int n = x.dim(0), length = x.dim(2), out_len = out_length(length);
    Tensor y({n, out_channels_, out_len});

    // Innermost loop runs over the contiguous output axis with the kernel tap
    // hoisted, keeping the hot path branch-free.
    for (int b = 0; b < n; ++b) {
        const double* xb = x.data.data() + static_cast<std::size_t>(b) * in_channels_ * length;
        double* yb = y.data.data() + static_cast<std::size_t>(b) * out_channels_ * out_len;
        for (int co = 0; co < out_channels_; ++co) {
            double* yrow = yb + static_cast<std::size_t>(co) * out_len;
            std::fill(yrow, yrow + out_len, bias.at(co));
            for (int ci = 0; ci < in_channels_; ++ci) {
                const double* xrow = xb + static_cast<std::size_t>(ci) * length;
                const double* wrow =
                    weight.data.data() + (static_cast<std::size_t>(co) * in_channels_ + ci) * kernel_;
                for (int k = 0; k < kernel_; ++k) {
                    const double wv = wrow[k];
                    const int shift = k - pad_;
                    const int t0 = shift < 0 ? (-shift + stride_ - 1) / stride_ : 0;
                    const int t1 = std::min(out_len, shift < length
                                                         ? (length - shift + stride_ - 1) / stride_
                                                         : 0);
                    for (int t = t0; t < t1; ++t) {
                        yrow[t] += wv * xrow[t * stride_ + shift];
                    }
                }
            }
        }
    }
    return y;
}

Tensor Conv1d::backward(const Tensor& grad_out) {
    require_ndim(grad_out, 3, "Conv1d backward");
    const int n = input_.dim(0), length = input_.dim(2), out_len = grad_out.dim(2);
    Tensor grad_in = Tensor::zeros(input_.shape);

    for (int b = 0; b < n; ++b) {
        const double* xb =
            input_.data.data() + static_cast<std::size_t>(b) * in_channels_ * length;
        const double* gob =
            grad_out.data.data() + static_cast<std::size_t>(b) * out_channels_ * out_len;
        double* gib = grad_in.data.data() + static_cast<std::size_t>(b) * in_channels_ * length;
        for (int co = 0; co < out_channels_; ++co) {
            const double* gorow = gob + static_cast<std::size_t>(co) * out_len;
            double bias_acc = 0.0;
            for (int t = 0; t < out_len; ++t) bias_acc += gorow[t];
            grad_bias.at(co) += bias_acc;

            for (int ci = 0; ci < in_channels_; ++ci) {
                const double* xrow = xb + static_cast<std::size_t>(ci) * length;
                double* girow = gib + static_cast<std::size_t>(ci) * length;
                const std::size_t wbase =
                    (static_cast<std::size_t>(co) * in_channels_ + ci) * kernel_;
                for (int k = 0; k < kernel_; ++k) {
                    const int shift = k - pad_;
                    const int t0 = shift < 0 ? (-shift + stride_ - 1) / stride_ : 0;
                    const int t1 = std::min(out_len, shift < length
                                                         ? (length - shift + stride_ - 1) / stride_
                                                         : 0);
                    const double wv = weight.data[wbase + k];
                    double w_acc = 0.0;
                    for (int t = t0; t < t1; ++t) {
                        const double go = gorow[t];
                        w_acc += go * xrow[t * stride_ + shift];
                        girow[t * stride_ + shift] += go * wv;
                    }
                    grad_weight.data[wbase + k] += w_acc;
                }
            }
        }
    }
    return grad_in;
}

// ---------------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(int channels, double momentum, double eps)
    : gamma(Tensor::zeros({channels})),
      beta(Tensor::zeros({channels})),
      grad_gamma(Tensor::zeros({channels})),
      grad_beta(Tensor::zeros({channels})),
      running_mean(Tensor::zeros({channels})),
      running_var(Tensor::zeros({channels})),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {
    gamma.fill(1.0);
    running_var.fill(1.0);
}

Tensor BatchNorm1d::forward(const Tensor& x, bool train) {
    if (x.ndim() != 2 && x.ndim() != 3) {
        throw std::invalid_argument("BatchNorm1d: expected 2-d or 3-d input, got " +
                                    x.shape_str());
    }
    if (x.dim(1) != channels_) {
        throw std::invalid_argument("BatchNorm1d: channel mismatch, got " + x.shape_str());
    }
    const int n = x.dim(0);
    const int length = x.ndim() == 3 ? x.dim(2) : 1;
    const double m = static_cast<double>(n) * length;

    Tensor y(x.shape);
    if (!train) {
        input_ = Tensor();  // eval forward leaves nothing for backward
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < channels_; ++c) {
                const double inv_std = 1.0 / std::sqrt(running_var.at(c) + eps_);
                for (int t = 0; t < length; ++t) {
                    const std::size_t idx = (static_cast<std::size_t>(b) * channels_ + c) * length + t;
                    y.data[idx] = gamma.at(c) * (x.data[idx] - running_mean.at(c)) * inv_std +
                                  beta.at(c);
                }
            }
        }
        return y;
    }

    if (m < 2.0) throw std::invalid_argument("BatchNorm1d: train batch needs >= 2 values per channel");

    input_ = x;
    batch_mean_.assign(channels_, 0.0);
    batch_inv_std_.assign(channels_, 0.0);
    x_hat_ = Tensor(x.shape);

    for (int c = 0; c < channels_; ++c) {
        double mean = 0.0;
        for (int b = 0; b < n; ++b) {
            for (int t = 0; t < length; ++t) {
                mean += x.data[(static_cast<std::size_t>(b) * channels_ + c) * length + t];
            }
        }
        mean /= m;
        double var = 0.0;
        for (int b = 0; b < n; ++b) {
            for (int t = 0; t < length; ++t) {
                const double d =
                    x.data[(static_cast<std::size_t>(b) * channels_ + c) * length + t] - mean;
                var += d * d;
            }
        }
        var /= m;

        const double inv_std = 1.0 / std::sqrt(var + eps_);
        batch_mean_[c] = mean;
        batch_inv_std_[c] = inv_std;
        for (int b = 0; b < n; ++b) {
            for (int t = 0; t < length; ++t) {
                const std::size_t idx = (static_cast<std::size_t>(b) * channels_ + c) * length + t;
                x_hat_.data[idx] = (x.data[idx] - mean) * inv_std;
                y.data[idx] = gamma.at(c) * x_hat_.data[idx] + beta.at(c);
            }
        }

        // Running stats track the unbiased variance estimate.
        const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
        running_mean.at(c) = (1.0 - momentum_) * running_mean.at(c) + momentum_ * mean;
        running_var.at(c) = (1.0 - momentum_) * running_var.at(c) + momentum_ * unbiased;
    }
    return y;
}

Tensor BatchNorm1d::backward(const Tensor& grad_out) {
    if (input_.numel() == 0) {
        throw std::logic_error("BatchNorm1d: backward without a train-mode forward");
    }
    const int n = input_.dim(0);
    const int length = input_.ndim() == 3 ? input_.dim(2) : 1;
    const double m = static_cast<double>(n) * length;

    Tensor grad_in(input_.shape);
    for (int c = 0; c < channels_; ++c) {
        double sum_go = 0.0, sum_go_xhat = 0.0;
        for (int b = 0; b < n; ++b) {
            for (int t = 0; t < length; ++t) {
                const std::size_t idx = (static_cast<std::size_t>(b) * channels_ + c) * length + t;
                sum_go += grad_out.data[idx];
                sum_go_xhat += grad_out.data[idx] * x_hat_.data[idx];
            }
        }
        grad_beta.at(c) += sum_go;
        grad_gamma.at(c) += sum_go_xhat;

        const double scale = gamma.at(c) * batch_inv_std_[c];
        for (int b = 0; b < n; ++b) {
            for (int t = 0; t < length; ++t) {
                const std::size_t idx = (static_cast<std::size_t>(b) * channels_ + c) * length + t;
                grad_in.data[idx] = scale * (grad_out.data[idx] - sum_go / m -
                                             x_hat_.data[idx] * sum_go_xhat / m);
            }
        }
    }
    return grad_in;
}

// ---------------------------------------------------------------- MaxPool1d

MaxPool1d::MaxPool1d(int kernel) : kernel_(kernel) {
    if (kernel <= 0) throw std::invalid_argument("MaxPool1d: kernel must be positive");
}

Tensor MaxPool1d::forward(const Tensor& x, bool) {
    require_ndim(x, 3, "MaxPool1d");
    const int n = x.dim(0), channels = x.dim(1), length = x.dim(2);
    const int out_len = (length + kernel_ - 1) / kernel_;  // tail window may be short
    in_shape_ = x.shape;

    Tensor y({n, channels, out_len});
    argmax_.assign(static_cast<std::size_t>(n) * channels * out_len, 0);
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < channels; ++c) {
            for (int t = 0; t < out_len; ++t) {
                const int start = t * kernel_;
                const int stop = std::min(start + kernel_, length);
                int best = start;
                double best_v = x.at(b, c, start);
                for (int p = start + 1; p < stop; ++p) {
                    if (x.at(b, c, p) > best_v) {
                        best_v = x.at(b, c, p);
                        best = p;
                    }
                }
                y.at(b, c, t) = best_v;
                argmax_[(static_cast<std::size_t>(b) * channels + c) * out_len + t] = best;
            }
        }
    }
    return y;
}

Tensor MaxPool1d::backward(const Tensor& grad_out) {
    require_ndim(grad_out, 3, "MaxPool1d backward");
    const int n = in_shape_[0], channels = in_shape_[1];
    const int out_len = grad_out.dim(2);
    Tensor grad_in = Tensor::zeros(in_shape_);
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < channels; ++c) {
            for (int t = 0; t < out_len; ++t) {
                const int src = argmax_[(static_cast<std::size_t>(b) * channels + c) * out_len + t];
                grad_in.at(b, c, src) += grad_out.at(b, c, t);
            }
        }
    }
    return grad_in;
}

// ---------------------------------------------------------------- GlobalAvgPool1d

Tensor GlobalAvgPool1d::forward(const Tensor& x, bool) {
    require_ndim(x, 3, "GlobalAvgPool1d");
    in_shape_ = x.shape;
    const int n = x.dim(0), channels = x.dim(1), length = x.dim(2);
    Tensor y({n, channels});
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (int t = 0; t < length; ++t) acc += x.at(b, c, t);
            y.at(b, c) = acc / length;
        }
    }
    return y;
}

Tensor GlobalAvgPool1d::backward(const Tensor& grad_out) {
    require_ndim(grad_out, 2, "GlobalAvgPool1d backward");
    const int n = in_shape_[0], channels = in_shape_[1], length = in_shape_[2];
    Tensor grad_in({n, channels, length});
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < channels; ++c) {
            const double g = grad_out.at(b, c) / length;
            for (int t = 0; t < length; ++t) grad_in.at(b, c, t) = g;
        }
    }
    return grad_in;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("Dropout: rate must lie in [0, 1)");
    }
}

Tensor Dropout::forward(const Tensor& x, bool train) {
    if (!train || rate_ == 0.0) {
        mask_.clear();
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate_);
    mask_.resize(x.numel());
    Tensor y(x.shape);
    for (std::size_t k = 0; k < x.numel(); ++k) {
        mask_[k] = rng_.next_double() < rate_ ? 0.0 : keep_scale;
        y.data[k] = x.data[k] * mask_[k];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& grad_out) {
    if (mask_.empty()) return grad_out;
    if (mask_.size() != grad_out.numel()) {
        throw std::logic_error("Dropout: backward shape does not match last forward");
    }
    Tensor grad_in(grad_out.shape);
    for (std::size_t k = 0; k < grad_out.numel(); ++k) {
        grad_in.data[k] = grad_out.data[k] * mask_[k];
    }
    return grad_in;
}

// ---------------------------------------------------------------- activations

Tensor ReLU::forward(const Tensor& x, bool) {
    input_ = x;
    Tensor y(x.shape);
    for (std::size_t k = 0; k < x.numel(); ++k) y.data[k] = x.data[k] > 0.0 ? x.data[k] : 0.0;
    return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    Tensor grad_in(grad_out.shape);
    for (std::size_t k = 0; k < grad_out.numel(); ++k) {
        grad_in.data[k] = input_.data[k] > 0.0 ? grad_out.data[k] : 0.0;
    }
    return grad_in;
}

LeakyReLU::LeakyReLU(double alpha) : alpha_(alpha) {}

Tensor LeakyReLU::forward(const Tensor& x, bool) {
    input_ = x;
    Tensor y(x.shape);
    for (std::size_t k = 0; k < x.numel(); ++k) {
        y.data[k] = x.data[k] > 0.0 ? x.data[k] : alpha_ * x.data[k];
    }
    return y;
}

Tensor LeakyReLU::backward(const Tensor& grad_out) {
    Tensor grad_in(grad_out.shape);
    for (std::size_t k = 0; k < grad_out.numel(); ++k) {
        grad_in.data[k] = input_.data[k] > 0.0 ? grad_out.data[k] : alpha_ * grad_out.data[k];
    }
    return grad_in;
}

Tensor Sigmoid::forward(const Tensor& x, bool) {
    output_ = Tensor(x.shape);
    for (std::size_t k = 0; k < x.numel(); ++k) {
        output_.data[k] = 1.0 / (1.0 + std::exp(-x.data[k]));
    }
    return output_;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
    Tensor grad_in(grad_out.shape);
    for (std::size_t k = 0; k < grad_out.numel(); ++k) {
        const double y = output_.data[k];
        grad_in.data[k] = grad_out.data[k] * y * (1.0 - y);
    }
    return grad_in;
}

Tensor Tanh::forward(const Tensor& x, bool) {
    output_ = Tensor(x.shape);
    for (std::size_t k = 0; k < x.numel(); ++k) output_.data[k] = std::tanh(x.data[k]);
    return output_;
}

Tensor Tanh::backward(const Tensor& grad_out) {
    Tensor grad_in(grad_out.shape);
    for (std::size_t k = 0; k < grad_out.numel(); ++k) {
        const double y = output_.data[k];
        grad_in.data[k] = grad_out.data[k] * (1.0 - y * y);
    }
    return grad_in;
}

// ---------------------------------------------------------------- Embedding

Embedding::Embedding(int num_entries, int dim)
    : table(Tensor::zeros({num_entries, dim})),
      grad_table(Tensor::zeros({num_entries, dim})),
      num_entries_(num_entries),
      dim_(dim) {}

Tensor Embedding::forward(const std::vector<int>& ids) {
    last_ids_ = ids;
    Tensor y({static_cast<int>(ids.size()), dim_});
    for (std::size_t n = 0; n < ids.size(); ++n) {
        if (ids[n] < 0 || ids[n] >= num_entries_) {
            throw std::invalid_argument("Embedding: id out of range: " + std::to_string(ids[n]));
        }
        for (int d = 0; d < dim_; ++d) y.at(static_cast<int>(n), d) = table.at(ids[n], d);
    }
    return y;
}

void Embedding::backward(const Tensor& grad_out) {
    if (grad_out.dim(0) != static_cast<int>(last_ids_.size()) || grad_out.dim(1) != dim_) {
        throw std::logic_error("Embedding: backward shape does not match last forward");
    }
    for (std::size_t n = 0; n < last_ids_.size(); ++n) {
        for (int d = 0; d < dim_; ++d) {
            grad_table.at(last_ids_[n], d) += grad_out.at(static_cast<int>(n), d);
        }
    }
}

// ---------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x, bool train) {
    Tensor h = x;
    for (auto& layer : layers_) h = layer->forward(h, train);
    return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<Tensor*> Sequential::params() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        for (auto* p : layer->params()) out.push_back(p);
    }
    return out;
}

std::vector<Tensor*> Sequential::grads() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        for (auto* g : layer->grads()) out.push_back(g);
    }
    return out;
}

// ---------------------------------------------------------------- losses

LossResult bce_loss(const Tensor& pred, double target) {
    if (pred.numel() == 0) throw std::invalid_argument("bce_loss: empty prediction");
    if (!(target >= 0.0 && target <= 1.0)) {
        throw std::invalid_argument("bce_loss: target must lie in [0, 1]");
    }
    const double n = static_cast<double>(pred.numel());
    LossResult res;
    res.grad = Tensor(pred.shape);
    double acc = 0.0;
    for (std::size_t k = 0; k < pred.numel(); ++k) {
        const double p = std::clamp(pred.data[k], 1e-7, 1.0 - 1e-7);
        acc -= target * std::log(p) + (1.0 - target) * std::log(1.0 - p);
        res.grad.data[k] = (-target / p + (1.0 - target) / (1.0 - p)) / n;
    }
    res.value = acc / n;
    return res;
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    require_ndim(logits, 2, "softmax_cross_entropy");
    const int n = logits.dim(0), classes = logits.dim(1);
    if (static_cast<int>(labels.size()) != n) {
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    }

    Tensor probs = softmax_rows(logits);
    LossResult res;
    res.grad = probs;
    double acc = 0.0;
    for (int b = 0; b < n; ++b) {
        if (labels[b] < 0 || labels[b] >= classes) {
            throw std::invalid_argument("softmax_cross_entropy: label out of range");
        }
        acc -= std::log(std::max(probs.at(b, labels[b]), 1e-300));
        res.grad.at(b, labels[b]) -= 1.0;
    }
    for (auto& v : res.grad.data) v /= n;
    res.value = acc / n;
    return res;
}

Tensor softmax_rows(const Tensor& logits) {
    require_ndim(logits, 2, "softmax_rows");
    const int n = logits.dim(0), classes = logits.dim(1);
    Tensor probs(logits.shape);
    for (int b = 0; b < n; ++b) {
        double peak = logits.at(b, 0);
        for (int c = 1; c < classes; ++c) peak = std::max(peak, logits.at(b, c));
        double denom = 0.0;
        for (int c = 0; c < classes; ++c) {
            probs.at(b, c) = std::exp(logits.at(b, c) - peak);
            denom += probs.at(b, c);
        }
        for (int c = 0; c < classes; ++c) probs.at(b, c) /= denom;
    }
    return probs;
}

// ---------------------------------------------------------------- Adam

Adam::Adam(std::vector<Tensor*> params, std::vector<Tensor*> grads, double lr, double beta1,
           double beta2, double eps)
    : params_(std::move(params)), grads_(std::move(grads)), lr_(lr), beta1_(beta1),
      beta2_(beta2), eps_(eps) {
    if (params_.size() != grads_.size()) {
        throw std::invalid_argument("Adam: params/grads count mismatch");
    }
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto* p : params_) {
        m_.push_back(Tensor::zeros(p->shape));
        v_.push_back(Tensor::zeros(p->shape));
    }
}

void Adam::zero_grad() {
    for (auto* g : grads_) g->fill(0.0);
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        const auto& g = *grads_[i];
        require_same_shape(p, g, "Adam::step");
        for (std::size_t k = 0; k < p.numel(); ++k) {
            m_[i].data[k] = beta1_ * m_[i].data[k] + (1.0 - beta1_) * g.data[k];
            v_[i].data[k] = beta2_ * v_[i].data[k] + (1.0 - beta2_) * g.data[k] * g.data[k];
            const double m_hat = m_[i].data[k] / bc1;
            const double v_hat = v_[i].data[k] / bc2;
            p.data[k] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

void init_gaussian(Tensor& t, Rng& rng, double stddev, double mean) {
    for (auto& v : t.data) v = mean + stddev * rng.next_gaussian();
}

// ---------------------------------------------------------------- weight files

void write_weight_file(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, const Tensor*>>& tensors,
                       const std::string& meta_json) {
    nlohmann::json header;
    header["meta"] = meta_json.empty() ? nlohmann::json::object()
                                       : nlohmann::json::parse(meta_json);
    auto list = nlohmann::json::array();
    for (const auto& [name, tensor] : tensors) {
        list.push_back({{"name", name}, {"shape", tensor->shape}});
    }
    header["tensors"] = std::move(list);

    AtomicFileWriter writer(path);
    auto& os = writer.stream();
    write_magic(os, "JWGT");
    write_le<std::uint16_t>(os, 1);
    write_json_block(os, header.dump());
    for (const auto& [name, tensor] : tensors) {
        for (double v : tensor->data) write_le<double>(os, v);
    }
    writer.commit();
}

WeightFile read_weight_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open weight file: " + path.string());
    expect_magic(is, "JWGT", path.string());
    const auto version = read_le<std::uint16_t>(is);
    if (version != 1) {
        throw std::runtime_error(path.string() + ": unsupported JWGT version " +
                                 std::to_string(version));
    }
    const auto header = nlohmann::json::parse(read_json_block(is));

    WeightFile out;
    out.meta_json = header.at("meta").dump();
    for (const auto& entry : header.at("tensors")) {
        const auto name = entry.at("name").get<std::string>();
        const auto shape = entry.at("shape").get<std::vector<int>>();
        Tensor t(shape);
        for (auto& v : t.data) v = read_le<double>(is);
        out.tensors.emplace(name, std::move(t));
    }
    if (!is) throw std::runtime_error(path.string() + ": truncated weight file");
    return out;
}

}  // namespace jamsig
