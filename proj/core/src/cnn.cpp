#include "jamsig/cnn.hpp"

#include <algorithm>
#include <stdexcept>

#include "jamsig/dsp.hpp"
#include "jamsig/synth.hpp"

namespace jamsig {

namespace {

std::vector<int> argmax_rows(const Tensor& logits) {
    std::vector<int> out(logits.dim(0));
    for (int r = 0; r < logits.dim(0); ++r) {
        int best = 0;
        for (int c = 1; c < logits.dim(1); ++c) {
            if (logits.at(r, c) > logits.at(r, best)) best = c;
        }
        out[r] = best;
    }
    return out;
}

}  // namespace

CnnNet::CnnNet(std::uint64_t seed) {
    Rng rng(seed);
    const auto conv = [&rng](int in, int out, int k, int stride, int pad) {
        auto layer = std::make_unique<Conv1d>(in, out, k, stride, pad);
        init_gaussian(layer->weight, rng, 0.02);
        return layer;
    };
    const auto dense = [&rng](int in, int out) {
        auto layer = std::make_unique<Dense>(in, out);
        init_gaussian(layer->weight, rng, 0.02);
        return layer;
    };

    body.add(conv(1, 16, 7, 2, 3));
    body.add(std::make_unique<BatchNorm1d>(16));
    body.add(std::make_unique<ReLU>());
    body.add(std::make_unique<MaxPool1d>(2));

    body.add(conv(16, 32, 5, 1, 2));
    body.add(std::make_unique<BatchNorm1d>(32));
    body.add(std::make_unique<ReLU>());
    body.add(std::make_unique<MaxPool1d>(2));

    body.add(conv(32, 64, 3, 1, 1));
    body.add(std::make_unique<BatchNorm1d>(64));
    body.add(std::make_unique<ReLU>());
    body.add(std::make_unique<GlobalAvgPool1d>());

    body.add(dense(64, 128));
    body.add(std::make_unique<ReLU>());
    body.add(dense(128, kNumClasses));
}

Tensor CnnNet::forward(const Tensor& x, bool train) {
    if (x.ndim() != 2 || x.dim(1) != kSpectrumLength) {
        throw std::invalid_argument("CnnNet: input must be {N, " +
                                    std::to_string(kSpectrumLength) + "}, got " + x.shape_str());
    }
    Tensor channels({x.dim(0), 1, kSpectrumLength}, x.data);
    return body.forward(channels, train);
}

Tensor CnnNet::backward(const Tensor& grad_logits) {
    Tensor grad = body.backward(grad_logits);
    return Tensor({grad.dim(0), kSpectrumLength}, grad.data);
}

std::vector<Tensor*> CnnNet::params() { return body.params(); }
std::vector<Tensor*> CnnNet::grads() { return body.grads(); }

std::vector<Tensor*> CnnNet::state_tensors() {
    auto out = body.params();
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (auto* bn = dynamic_cast<BatchNorm1d*>(&body.layer(i))) {
            out.push_back(&bn->running_mean);
            out.push_back(&bn->running_var);
        }
    }
    return out;
}

std::size_t CnnNet::param_count() const {
    std::size_t total = 0;
    for (const auto* p : const_cast<CnnNet*>(this)->params()) total += p->numel();
    return total;
}

CnnTrainer::CnnTrainer(const CnnTrainConfig& cfg)
    : cfg_(cfg),
      net_(mix_seed(cfg.seed, 0x636e6e)),
      opt_(net_.params(), net_.grads(), cfg.lr, cfg.beta1, cfg.beta2),
      rng_(mix_seed(cfg.seed, 0x736875)) {
    if (cfg.epochs <= 0 || cfg.batch_size <= 0) {
        throw std::invalid_argument("CnnTrainer: epochs and batch_size must be positive");
    }
}

CnnHistory CnnTrainer::train(const Tensor& data, const std::vector<int>& labels,
                             const std::function<void(int, double, double)>& on_epoch) {
    if (data.ndim() != 2 || data.dim(1) != kSpectrumLength) {
        throw std::invalid_argument("CnnTrainer: data must be {N, " +
                                    std::to_string(kSpectrumLength) + "}, got " +
                                    data.shape_str());
    }
    const int count = data.dim(0);
    if (count == 0) throw std::invalid_argument("CnnTrainer: empty dataset");
    if (static_cast<int>(labels.size()) != count) {
        throw std::invalid_argument("CnnTrainer: data/label count mismatch");
    }

    const int batch = std::min(cfg_.batch_size, count);
    const int steps = (count + batch - 1) / batch;

    CnnHistory history;
    history.loss.reserve(cfg_.epochs);
    history.train_accuracy.reserve(cfg_.epochs);

    std::vector<int> order(count);
    for (int k = 0; k < count; ++k) order[k] = k;

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        for (int k = count - 1; k > 0; --k) {
            const auto j = static_cast<int>(rng_.uniform_int(0, k));
            std::swap(order[k], order[j]);
        }

        double epoch_loss = 0.0;
        int correct = 0;
        for (int step = 0; step < steps; ++step) {
            const int first = step * batch;
            const int nb = std::min(batch, count - first);

            Tensor xb({nb, kSpectrumLength});
            std::vector<int> yb(nb);
            for (int r = 0; r < nb; ++r) {
                const int src = order[first + r];
                yb[r] = labels[src];
                for (int c = 0; c < kSpectrumLength; ++c) xb.at(r, c) = data.at(src, c);
            }

            opt_.zero_grad();
            const Tensor logits = net_.forward(xb, true);
            const LossResult loss = softmax_cross_entropy(logits, yb);
            net_.backward(loss.grad);
            opt_.step();

            epoch_loss += loss.value * nb;
            const auto preds = argmax_rows(logits);
            for (int r = 0; r < nb; ++r) {
                if (preds[r] == yb[r]) ++correct;
            }
        }

        history.loss.push_back(epoch_loss / count);
        history.train_accuracy.push_back(static_cast<double>(correct) / count);
        if (on_epoch) on_epoch(epoch, history.loss.back(), history.train_accuracy.back());
    }
    return history;
}

std::vector<int> CnnTrainer::predict(const Tensor& data) {
    if (data.ndim() != 2 || data.dim(1) != kSpectrumLength) {
        throw std::invalid_argument("CnnTrainer::predict: bad input shape " + data.shape_str());
    }
    const int count = data.dim(0);
    std::vector<int> out;
    out.reserve(count);

    constexpr int kChunk = 256;
    for (int first = 0; first < count; first += kChunk) {
        const int nb = std::min(kChunk, count - first);
        Tensor xb({nb, kSpectrumLength});
        std::copy_n(data.data.begin() + static_cast<std::size_t>(first) * kSpectrumLength,
                    static_cast<std::size_t>(nb) * kSpectrumLength, xb.data.begin());
        const Tensor logits = net_.forward(xb, false);
        for (int v : argmax_rows(logits)) out.push_back(v);
    }
    return out;
}

double CnnTrainer::evaluate(const Tensor& data, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != data.dim(0)) {
        throw std::invalid_argument("CnnTrainer::evaluate: data/label count mismatch");
    }
    if (labels.empty()) throw std::invalid_argument("CnnTrainer::evaluate: empty dataset");
    const auto preds = predict(data);
    int correct = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (preds[k] == labels[k]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void save_cnn_weights(const std::filesystem::path& path, CnnNet& net,
                      const std::string& meta_json) {
    std::vector<std::pair<std::string, const Tensor*>> named;
    const auto tensors = net.state_tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        named.emplace_back("cnn.t" + std::to_string(i), tensors[i]);
    }
    write_weight_file(path, named, meta_json);
}

std::string load_cnn_weights(const std::filesystem::path& path, CnnNet& net) {
    const WeightFile file = read_weight_file(path);
    const auto tensors = net.state_tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto name = "cnn.t" + std::to_string(i);
        const auto it = file.tensors.find(name);
        if (it == file.tensors.end()) {
            throw std::runtime_error(path.string() + ": missing tensor " + name);
        }
        require_same_shape(*tensors[i], it->second, "load_cnn_weights(" + name + ")");
        tensors[i]->data = it->second.data;
    }
    return file.meta_json;
}

}  // namespace jamsig
