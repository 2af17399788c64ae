#include "jamsig/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jamsig/dsp.hpp"

namespace jamsig {

namespace {

constexpr double kLossBandLow = 0.3;
constexpr double kLossBandHigh = 1.4;
constexpr double kMaxWindowDrift = 0.5;

const std::vector<std::pair<int, int>> kGenWidths = {
    {kNoiseDim + kLabelEmbedDim, 256}, {256, 256}, {256, 512}, {512, 512}, {512, 512},
    {512, 512},                        {512, 768}, {768, 768}, {768, 800}, {800, 800},
};

const std::vector<std::pair<int, int>> kDiscWidths = {
    {kSpectrumLength + kLabelEmbedDim, 800}, {800, 512}, {512, 512}, {512, 256}, {256, 256},
    {256, 128},                              {128, 128}, {128, 64},  {64, 64},   {64, 1},
};

// Ten plain dense layers with no normalization between them: the init must
// preserve activation variance or signals decay geometrically and the
// sigmoid head pins at 0.5. He-style scaling for the leaky-ReLU hidden
// layers, Xavier for the output layer feeding tanh / sigmoid.
std::unique_ptr<Dense> make_dense(int in, int out, Rng& rng, bool output_layer) {
    auto layer = std::make_unique<Dense>(in, out);
    const double std_dev = output_layer ? std::sqrt(2.0 / (in + out))
                                        : std::sqrt(2.0 / ((1.0 + 0.2 * 0.2) * in));
    init_gaussian(layer->weight, rng, std_dev);
    return layer;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    const int n = a.dim(0), wa = a.dim(1), wb = b.dim(1);
    Tensor out({n, wa + wb});
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < wa; ++c) out.at(r, c) = a.at(r, c);
        for (int c = 0; c < wb; ++c) out.at(r, wa + c) = b.at(r, c);
    }
    return out;
}

Tensor slice_cols(const Tensor& x, int first, int count) {
    const int n = x.dim(0);
    Tensor out({n, count});
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < count; ++c) out.at(r, c) = x.at(r, first + c);
    }
    return out;
}

std::size_t count_params(const std::vector<Tensor*>& params) {
    std::size_t total = 0;
    for (const auto* p : params) total += p->numel();
    return total;
}

struct WindowStats {
    double mean;
    double drift;  // fitted change across the window
};

WindowStats window_stats(const std::vector<double>& series, std::size_t window) {
    const std::size_t start = series.size() - window;
    double mean = 0.0;
    for (std::size_t k = start; k < series.size(); ++k) mean += series[k];
    mean /= static_cast<double>(window);

    // Least-squares slope against step index within the window.
    const double x_mean = (static_cast<double>(window) - 1.0) / 2.0;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
        const double dx = static_cast<double>(k) - x_mean;
        num += dx * (series[start + k] - mean);
        den += dx * dx;
    }
    const double slope = den > 0.0 ? num / den : 0.0;
    return {mean, slope * (static_cast<double>(window) - 1.0)};
}

}  // namespace

// ---------------------------------------------------------------- GeneratorNet

GeneratorNet::GeneratorNet(std::uint64_t seed) : label_embed(kNumClasses, kLabelEmbedDim) {
    Rng rng(seed);
    init_gaussian(label_embed.table, rng, 1.0);
    for (std::size_t i = 0; i < kGenWidths.size(); ++i) {
        const bool last = i + 1 == kGenWidths.size();
        body.add(make_dense(kGenWidths[i].first, kGenWidths[i].second, rng, last));
        if (last) {
            body.add(std::make_unique<Tanh>());
        } else {
            body.add(std::make_unique<LeakyReLU>(0.2));
        }
    }
}

Tensor GeneratorNet::forward(const Tensor& z, const std::vector<int>& labels, bool train) {
    if (z.ndim() != 2 || z.dim(1) != kNoiseDim) {
        throw std::invalid_argument("GeneratorNet: noise must be {N, " +
                                    std::to_string(kNoiseDim) + "}, got " + z.shape_str());
    }
    if (z.dim(0) != static_cast<int>(labels.size())) {
        throw std::invalid_argument("GeneratorNet: noise/label count mismatch");
    }
    return body.forward(concat_cols(z, label_embed.forward(labels)), train);
}

void GeneratorNet::backward(const Tensor& grad_out) {
    const Tensor grad_in = body.backward(grad_out);
    label_embed.backward(slice_cols(grad_in, kNoiseDim, kLabelEmbedDim));
}

std::vector<Tensor*> GeneratorNet::params() {
    auto out = label_embed.params();
    for (auto* p : body.params()) out.push_back(p);
    return out;
}

std::vector<Tensor*> GeneratorNet::grads() {
    auto out = label_embed.grads();
    for (auto* g : body.grads()) out.push_back(g);
    return out;
}

std::size_t GeneratorNet::param_count() const {
    return count_params(const_cast<GeneratorNet*>(this)->params());
}

// ---------------------------------------------------------------- DiscriminatorNet

DiscriminatorNet::DiscriminatorNet(std::uint64_t seed, double dropout)
    : label_embed(kNumClasses, kLabelEmbedDim) {
    Rng rng(seed);
    init_gaussian(label_embed.table, rng, 1.0);
    for (std::size_t i = 0; i < kDiscWidths.size(); ++i) {
        const bool last = i + 1 == kDiscWidths.size();
        body.add(make_dense(kDiscWidths[i].first, kDiscWidths[i].second, rng, last));
        if (last) {
            body.add(std::make_unique<Sigmoid>());
        } else {
            body.add(std::make_unique<LeakyReLU>(0.2));
            if (dropout > 0.0) {
                body.add(std::make_unique<Dropout>(dropout, mix_seed(seed, 0x6472 + i)));
            }
        }
    }
}

Tensor DiscriminatorNet::forward(const Tensor& x, const std::vector<int>& labels, bool train) {
    if (x.ndim() != 2 || x.dim(1) != kSpectrumLength) {
        throw std::invalid_argument("DiscriminatorNet: input must be {N, " +
                                    std::to_string(kSpectrumLength) + "}, got " + x.shape_str());
    }
    if (x.dim(0) != static_cast<int>(labels.size())) {
        throw std::invalid_argument("DiscriminatorNet: input/label count mismatch");
    }
    return body.forward(concat_cols(x, label_embed.forward(labels)), train);
}

Tensor DiscriminatorNet::backward(const Tensor& grad_out) {
    const Tensor grad_in = body.backward(grad_out);
    label_embed.backward(slice_cols(grad_in, kSpectrumLength, kLabelEmbedDim));
    return slice_cols(grad_in, 0, kSpectrumLength);
}

std::vector<Tensor*> DiscriminatorNet::params() {
    auto out = label_embed.params();
    for (auto* p : body.params()) out.push_back(p);
    return out;
}

std::vector<Tensor*> DiscriminatorNet::grads() {
    auto out = label_embed.grads();
    for (auto* g : body.grads()) out.push_back(g);
    return out;
}

std::size_t DiscriminatorNet::param_count() const {
    return count_params(const_cast<DiscriminatorNet*>(this)->params());
}

// ---------------------------------------------------------------- equilibrium

EquilibriumReport check_equilibrium(const GanHistory& history, double window_fraction) {
    if (history.d_loss.size() != history.g_loss.size()) {
        throw std::invalid_argument("check_equilibrium: loss series lengths differ");
    }
    if (history.d_loss.size() < 2) {
        throw std::invalid_argument("check_equilibrium: need at least 2 steps");
    }
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
        throw std::invalid_argument("check_equilibrium: window_fraction must lie in (0, 1]");
    }

    const auto window = std::max<std::size_t>(
        2, static_cast<std::size_t>(window_fraction * static_cast<double>(history.d_loss.size())));
    const auto g = window_stats(history.g_loss, window);
    const auto d = window_stats(history.d_loss, window);

    EquilibriumReport report;
    report.g_mean = g.mean;
    report.d_mean = d.mean;
    report.g_slope = g.drift;
    report.d_slope = d.drift;
    report.converged = g.mean >= kLossBandLow && g.mean <= kLossBandHigh &&
                       d.mean >= kLossBandLow && d.mean <= kLossBandHigh &&
                       std::abs(g.drift) < kMaxWindowDrift && std::abs(d.drift) < kMaxWindowDrift;
    return report;
}

// ---------------------------------------------------------------- GanTrainer

GanTrainer::GanTrainer(const GanTrainConfig& cfg)
    : cfg_(cfg),
      gen_(mix_seed(cfg.seed, 0x67656e)),
      disc_(mix_seed(cfg.seed, 0x64697363), cfg.disc_dropout),
      gen_opt_(gen_.params(), gen_.grads(), cfg.lr, cfg.beta1, cfg.beta2),
      disc_opt_(disc_.params(), disc_.grads(), cfg.lr * cfg.d_lr_scale, cfg.beta1, cfg.beta2),
      rng_(mix_seed(cfg.seed, 0x7a6f6973)) {
    if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.g_steps <= 0) {
        throw std::invalid_argument("GanTrainer: epochs, batch_size, g_steps must be positive");
    }
    if (cfg.instance_noise_floor < 0.0 || cfg.instance_noise_floor > 1.0) {
        throw std::invalid_argument("GanTrainer: instance_noise_floor must lie in [0, 1]");
    }
}

GanHistory GanTrainer::train(const Tensor& data, const std::vector<int>& labels,
                             const std::function<void(int, double, double)>& on_epoch) {
    if (data.ndim() != 2 || data.dim(1) != kSpectrumLength) {
        throw std::invalid_argument("GanTrainer: data must be {N, " +
                                    std::to_string(kSpectrumLength) + "}, got " +
                                    data.shape_str());
    }
    const int count = data.dim(0);
    if (count == 0) throw std::invalid_argument("GanTrainer: empty dataset");
    if (static_cast<int>(labels.size()) != count) {
        throw std::invalid_argument("GanTrainer: data/label count mismatch");
    }

    const int batch = std::min(cfg_.batch_size, count);
    const int steps = (count + batch - 1) / batch;

    GanHistory history;
    history.steps_per_epoch = steps;
    history.d_loss.reserve(static_cast<std::size_t>(steps) * cfg_.epochs);
    history.g_loss.reserve(static_cast<std::size_t>(steps) * cfg_.epochs);

    std::vector<int> order(count);
    for (int k = 0; k < count; ++k) order[k] = k;

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        for (int k = count - 1; k > 0; --k) {
            const auto j = static_cast<int>(rng_.uniform_int(0, k));
            std::swap(order[k], order[j]);
        }

        // Instance noise anneals but keeps a small floor so the supports
        // never separate exactly. The floor must stay below the natural
        // per-group wobble of real spectra or it masks the very texture the
        // discriminator needs late in training.
        const double sigma =
            cfg_.instance_noise *
            std::max(cfg_.instance_noise_floor,
                     1.0 - static_cast<double>(epoch) / cfg_.epochs);
        auto blur = [&](const Tensor& t) {
            Tensor out = t;
            if (sigma > 0.0) {
                for (auto& v : out.data) v += sigma * rng_.next_gaussian();
            }
            return out;
        };

        double epoch_d = 0.0, epoch_g = 0.0;
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

            // Discriminator step; generator weights stay fixed. Negatives
            // come in two kinds, each at half weight: generated spectra with
            // matching labels, and real spectra with shuffled labels. The
            // second kind is what makes the discriminator check label
            // consistency at all; without it, real/fake is separable from
            // the spectrum alone and the generator never receives a
            // class-conditional gradient.
            disc_opt_.zero_grad();
            const Tensor p_real = disc_.forward(blur(xb), yb, true);
            const LossResult l_real = bce_loss(p_real, cfg_.real_target);
            disc_.backward(l_real.grad);

            Tensor z1({nb, kNoiseDim});
            init_gaussian(z1, rng_, 1.0);
            const Tensor fake1 = gen_.forward(z1, yb, true);
            const Tensor p_fake = disc_.forward(blur(fake1), yb, true);
            LossResult l_fake = bce_loss(p_fake, 0.0);
            for (auto& g : l_fake.grad.data) g *= 0.5;
            disc_.backward(l_fake.grad);

            std::vector<int> y_wrong(nb);
            for (int r = 0; r < nb; ++r) {
                y_wrong[r] = (yb[r] + 1 +
                              static_cast<int>(rng_.uniform_int(0, kNumClasses - 2))) %
                             kNumClasses;
            }
            const Tensor p_wrong = disc_.forward(blur(xb), y_wrong, true);
            LossResult l_wrong = bce_loss(p_wrong, 0.0);
            for (auto& g : l_wrong.grad.data) g *= 0.5;
            disc_.backward(l_wrong.grad);
            disc_opt_.step();

            // Generator step(s) with fresh noise; discriminator weights stay
            // fixed (its gradients are discarded at the next zero_grad).
            // Additive noise is identity in the gradient, so the input grad
            // returned by the discriminator applies to fake2 unchanged.
            double g_last = 0.0;
            for (int gs = 0; gs < cfg_.g_steps; ++gs) {
                gen_opt_.zero_grad();
                Tensor z2({nb, kNoiseDim});
                init_gaussian(z2, rng_, 1.0);
                const Tensor fake2 = gen_.forward(z2, yb, true);
                const Tensor p_gen = disc_.forward(blur(fake2), yb, true);
                const LossResult l_gen = bce_loss(p_gen, 1.0);
                const Tensor grad_fake = disc_.backward(l_gen.grad);
                gen_.backward(grad_fake);
                gen_opt_.step();
                g_last = l_gen.value;
            }

            const double d_total = l_real.value + 0.5 * (l_fake.value + l_wrong.value);
            history.d_loss.push_back(d_total);
            history.g_loss.push_back(g_last);
            epoch_d += d_total;
            epoch_g += g_last;
        }

        if (on_epoch) on_epoch(epoch, epoch_d / steps, epoch_g / steps);
    }
    return history;
}

Tensor GanTrainer::generate(const std::vector<int>& labels) {
    if (labels.empty()) throw std::invalid_argument("GanTrainer::generate: no labels");
    Tensor z({static_cast<int>(labels.size()), kNoiseDim});
    init_gaussian(z, rng_, 1.0);
    return gen_.forward(z, labels, false);
}

// ---------------------------------------------------------------- persistence

namespace {

void append_named(std::vector<std::pair<std::string, const Tensor*>>& out,
                  const std::string& prefix, const std::vector<Tensor*>& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        out.emplace_back(prefix + ".t" + std::to_string(i), params[i]);
    }
}

void restore_named(const WeightFile& file, const std::string& prefix,
                   const std::vector<Tensor*>& params, const std::string& path) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto name = prefix + ".t" + std::to_string(i);
        const auto it = file.tensors.find(name);
        if (it == file.tensors.end()) {
            throw std::runtime_error(path + ": missing tensor " + name);
        }
        require_same_shape(*params[i], it->second, "load_gan_weights(" + name + ")");
        params[i]->data = it->second.data;
    }
}

}  // namespace

void save_gan_weights(const std::filesystem::path& path, GeneratorNet& gen,
                      DiscriminatorNet& disc, const std::string& meta_json) {
    std::vector<std::pair<std::string, const Tensor*>> named;
    append_named(named, "gen", gen.params());
    append_named(named, "disc", disc.params());
    write_weight_file(path, named, meta_json);
}

std::string load_gan_weights(const std::filesystem::path& path, GeneratorNet& gen,
                             DiscriminatorNet& disc) {
    const WeightFile file = read_weight_file(path);
    restore_named(file, "gen", gen.params(), path.string());
    restore_named(file, "disc", disc.params(), path.string());
    return file.meta_json;
}

}  // namespace jamsig
