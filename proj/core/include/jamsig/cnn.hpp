#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jamsig/nn.hpp"

namespace jamsig {

// 1-D convolutional classifier over length-800 spectra:
// conv(1->16, k7, s2) -> BN -> ReLU -> pool2
// conv(16->32, k5)    -> BN -> ReLU -> pool2
// conv(32->64, k3)    -> BN -> ReLU -> global average pool
// dense(64->128) -> ReLU -> dense(128->8) logits.
class CnnNet {
public:
    explicit CnnNet(std::uint64_t seed);
    Tensor forward(const Tensor& x, bool train);  // {N, 800} -> {N, 8} logits
    Tensor backward(const Tensor& grad_logits);
    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    // Trainable params plus batch-norm running stats, for persistence.
    std::vector<Tensor*> state_tensors();
    std::size_t param_count() const;

    Sequential body;
};

struct CnnTrainConfig {
    int epochs = 100;
    int batch_size = 32;  // clamps to the dataset size
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::uint64_t seed = 0;
};

struct CnnHistory {
    std::vector<double> loss;            // per-epoch mean cross-entropy
    std::vector<double> train_accuracy;  // per-epoch accuracy on training batches
};

class CnnTrainer {
public:
    explicit CnnTrainer(const CnnTrainConfig& cfg);

    // data: {count, 800} normalized spectra; labels: count class ids.
    // on_epoch, when set, receives (epoch index, mean loss, train accuracy).
    CnnHistory train(const Tensor& data, const std::vector<int>& labels,
                     const std::function<void(int, double, double)>& on_epoch = {});

    std::vector<int> predict(const Tensor& data);
    double evaluate(const Tensor& data, const std::vector<int>& labels);

    CnnNet& net() { return net_; }
    const CnnTrainConfig& config() const { return cfg_; }

private:
    CnnTrainConfig cfg_;
    CnnNet net_;
    Adam opt_;
    Rng rng_;
};

void save_cnn_weights(const std::filesystem::path& path, CnnNet& net,
                      const std::string& meta_json);
std::string load_cnn_weights(const std::filesystem::path& path, CnnNet& net);

}  // namespace jamsig
