#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jamsig/nn.hpp"

namespace jamsig {

inline constexpr int kNoiseDim = 100;
inline constexpr int kLabelEmbedDim = 100;

// Generator: [z | embed(label)] -> dense/LeakyReLU stack -> tanh, producing a
// normalized spectrum in [-1, 1]^800.
class GeneratorNet {
public:
    explicit GeneratorNet(std::uint64_t seed);
    Tensor forward(const Tensor& z, const std::vector<int>& labels, bool train);
    // grad_out is w.r.t. the produced spectrum; noise gets no gradient.
    void backward(const Tensor& grad_out);
    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    std::size_t param_count() const;

    Embedding label_embed;
    Sequential body;
};

// Discriminator: [x | embed(label)] -> dense/LeakyReLU/dropout stack -> sigmoid
// score in (0, 1).
class DiscriminatorNet {
public:
    explicit DiscriminatorNet(std::uint64_t seed, double dropout = 0.3);
    Tensor forward(const Tensor& x, const std::vector<int>& labels, bool train);
    // Returns the gradient w.r.t. the spectrum input (for the generator step).
    Tensor backward(const Tensor& grad_out);
    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    std::size_t param_count() const;

    Embedding label_embed;
    Sequential body;
};

struct GanTrainConfig {
    int epochs = 3200;
    int batch_size = 32;  // clamps to the dataset size
    double lr = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    // Few-shot stabilizers. The discriminator sees tens of real rows and
    // would memorize them long before the generator catches up. Smoothing
    // caps its confidence on real data, input noise keeps the real/fake
    // supports overlapping, and the lr scale / step ratio slow it down
    // relative to the generator.
    double real_target = 0.9;
    double instance_noise = 0.25;        // initial sigma, annealed linearly
    double instance_noise_floor = 0.02;  // anneal floor, as a fraction of the initial sigma
    double d_lr_scale = 0.5;
    // Stacked dropout across nine blocks drowns the label pathway and the
    // discriminator goes label-blind, which starves the generator of
    // class-conditional gradients. Off by default; the layer stays available.
    double disc_dropout = 0.0;
    int g_steps = 2;  // generator updates per discriminator update
    std::uint64_t seed = 0;
};

struct GanHistory {
    std::vector<double> d_loss;  // one entry per optimization step
    std::vector<double> g_loss;
    int steps_per_epoch = 0;
};

struct EquilibriumReport {
    bool converged = false;
    double g_mean = 0.0;
    double d_mean = 0.0;
    double g_slope = 0.0;  // per-window linear-fit slope
    double d_slope = 0.0;
};

// Trailing-window equilibrium check: both loss means inside [0.3, 1.4] and
// both fitted slopes below 0.5 in magnitude across the window.
EquilibriumReport check_equilibrium(const GanHistory& history, double window_fraction = 0.1);

class GanTrainer {
public:
    explicit GanTrainer(const GanTrainConfig& cfg);

    // data: {count, 800} normalized spectra; labels: count class ids.
    // on_epoch, when set, receives (epoch index, mean d_loss, mean g_loss).
    GanHistory train(const Tensor& data, const std::vector<int>& labels,
                     const std::function<void(int, double, double)>& on_epoch = {});

    // Draws noise internally; spectra come back in the normalized domain.
    Tensor generate(const std::vector<int>& labels);

    GeneratorNet& generator() { return gen_; }
    DiscriminatorNet& discriminator() { return disc_; }
    const GanTrainConfig& config() const { return cfg_; }

private:
    GanTrainConfig cfg_;
    GeneratorNet gen_;
    DiscriminatorNet disc_;
    Adam gen_opt_;
    Adam disc_opt_;
    Rng rng_;
};

// Both networks in one JWGT file; meta_json travels alongside.
void save_gan_weights(const std::filesystem::path& path, GeneratorNet& gen,
                      DiscriminatorNet& disc, const std::string& meta_json);
// Returns the stored meta JSON. Shapes must match the constructed nets.
std::string load_gan_weights(const std::filesystem::path& path, GeneratorNet& gen,
                             DiscriminatorNet& disc);

}  // namespace jamsig
