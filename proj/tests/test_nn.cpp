#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "jamsig/nn.hpp"

using namespace jamsig;

namespace {

constexpr double kH = 1e-6;
constexpr double kRelTol = 1e-5;

// Scalar probe loss L = sum(w ⊙ y) with fixed random weights, so dL/dy = w.
Tensor probe_weights(const std::vector<int>& shape, std::uint64_t seed) {
    Rng rng(seed);
    Tensor w(shape);
    for (auto& v : w.data) v = rng.next_gaussian();
    return w;
}

double probe_loss(const Tensor& y, const Tensor& w) {
    double acc = 0.0;
    for (std::size_t k = 0; k < y.numel(); ++k) acc += y.data[k] * w.data[k];
    return acc;
}

double rel_error(const Tensor& analytic, const std::vector<double>& numeric) {
    REQUIRE(analytic.numel() == numeric.size());
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < numeric.size(); ++k) {
        const double d = analytic.data[k] - numeric[k];
        diff += d * d;
        norm += numeric[k] * numeric[k];
    }
    return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

// Central finite differences of L(x) = sum(w ⊙ layer(x)) against backward(w).
void check_input_gradient(Layer& layer, Tensor x, std::uint64_t probe_seed) {
    const Tensor y = layer.forward(x, true);
    const Tensor w = probe_weights(y.shape, probe_seed);
    const Tensor analytic = layer.backward(w);

    std::vector<double> numeric(x.numel());
    for (std::size_t k = 0; k < x.numel(); ++k) {
        const double keep = x.data[k];
        x.data[k] = keep + kH;
        const double up = probe_loss(layer.forward(x, true), w);
        x.data[k] = keep - kH;
        const double down = probe_loss(layer.forward(x, true), w);
        x.data[k] = keep;
        numeric[k] = (up - down) / (2.0 * kH);
    }
    CHECK(rel_error(analytic, numeric) < kRelTol);
}

// Finite differences through every parameter tensor of the layer.
void check_param_gradients(Layer& layer, const Tensor& x, std::uint64_t probe_seed) {
    const Tensor y = layer.forward(x, true);
    const Tensor w = probe_weights(y.shape, probe_seed);
    for (Tensor* g : layer.grads()) g->fill(0.0);
    layer.backward(w);

    const auto params = layer.params();
    const auto grads = layer.grads();
    REQUIRE(params.size() == grads.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
        std::vector<double> numeric(params[p]->numel());
        for (std::size_t k = 0; k < params[p]->numel(); ++k) {
            const double keep = params[p]->data[k];
            params[p]->data[k] = keep + kH;
            const double up = probe_loss(layer.forward(x, true), w);
            params[p]->data[k] = keep - kH;
            const double down = probe_loss(layer.forward(x, true), w);
            params[p]->data[k] = keep;
            numeric[k] = (up - down) / (2.0 * kH);
        }
        CHECK(rel_error(*grads[p], numeric) < kRelTol);
    }
}

Tensor random_input(const std::vector<int>& shape, std::uint64_t seed, double offset = 0.0) {
    Rng rng(seed);
    Tensor x(shape);
    for (auto& v : x.data) {
        v = rng.next_gaussian();
        // Keep piecewise-linear kinks (ReLU at 0, near-ties in pooling) away
        // from the finite-difference step.
        if (offset > 0.0) v += v >= 0.0 ? offset : -offset;
    }
    return x;
}

}  // namespace

TEST_CASE("Dense gradients match finite differences") {
    Dense layer(4, 3);
    Rng rng(2);
    init_gaussian(layer.weight, rng, 0.5);
    init_gaussian(layer.bias, rng, 0.5);
    check_input_gradient(layer, random_input({5, 4}, 10), 11);
    check_param_gradients(layer, random_input({5, 4}, 12), 13);
}

TEST_CASE("Conv1d gradients match finite differences") {
    Conv1d layer(2, 3, 3, 2, 1);
    Rng rng(3);
    init_gaussian(layer.weight, rng, 0.5);
    init_gaussian(layer.bias, rng, 0.5);
    CHECK(layer.out_length(9) == 5);
    check_input_gradient(layer, random_input({2, 2, 9}, 20), 21);
    check_param_gradients(layer, random_input({2, 2, 9}, 22), 23);
}

TEST_CASE("Conv1d stride-1 same-padding gradients match finite differences") {
    Conv1d layer(3, 2, 5, 1, 2);
    Rng rng(4);
    init_gaussian(layer.weight, rng, 0.5);
    init_gaussian(layer.bias, rng, 0.5);
    CHECK(layer.out_length(8) == 8);
    check_input_gradient(layer, random_input({2, 3, 8}, 30), 31);
    check_param_gradients(layer, random_input({2, 3, 8}, 32), 33);
}

TEST_CASE("BatchNorm1d train-mode gradients match finite differences") {
    BatchNorm1d layer(3);
    Rng rng(5);
    init_gaussian(layer.gamma, rng, 0.3, 1.0);
    init_gaussian(layer.beta, rng, 0.3);
    check_input_gradient(layer, random_input({4, 3, 6}, 40), 41);
    check_param_gradients(layer, random_input({4, 3, 6}, 42), 43);
}

TEST_CASE("BatchNorm1d tracks running statistics and uses them in eval mode") {
    BatchNorm1d layer(2);
    Tensor x({2, 2, 2});
    // channel 0: values 1,2,3,4 (mean 2.5); channel 1: all 10 (variance 0).
    x.at(0, 0, 0) = 1.0;
    x.at(0, 0, 1) = 2.0;
    x.at(1, 0, 0) = 3.0;
    x.at(1, 0, 1) = 4.0;
    x.at(0, 1, 0) = 10.0;
    x.at(0, 1, 1) = 10.0;
    x.at(1, 1, 0) = 10.0;
    x.at(1, 1, 1) = 10.0;

    layer.forward(x, true);
    // momentum 0.1: running = 0.9 * 0 + 0.1 * batch; variance is unbiased.
    CHECK(layer.running_mean.at(0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(layer.running_mean.at(1) == doctest::Approx(1.0).epsilon(1e-12));
    const double unbiased_var0 = (2.25 + 0.25 + 0.25 + 2.25) / 3.0;
    CHECK(layer.running_var.at(0) == doctest::Approx(0.9 + 0.1 * unbiased_var0).epsilon(1e-12));
    CHECK(layer.running_var.at(1) == doctest::Approx(0.9).epsilon(1e-12));

    // Eval mode normalizes with the running stats, not the batch stats.
    const Tensor y = layer.forward(x, false);
    const double expect = (1.0 - 0.25) / std::sqrt(0.9 + 0.1 * unbiased_var0 + 1e-5);
    CHECK(y.at(0, 0, 0) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("MaxPool1d gradients match finite differences, odd tail included") {
    MaxPool1d layer(2);
    // Length 7 -> outputs 4, the last window covering a single element.
    check_input_gradient(layer, random_input({2, 3, 7}, 50, 0.0), 51);

    Tensor x({1, 1, 5});
    x.at(0, 0, 0) = 1.0;
    x.at(0, 0, 1) = 5.0;
    x.at(0, 0, 2) = 2.0;
    x.at(0, 0, 3) = 2.0;
    x.at(0, 0, 4) = 9.0;
    const Tensor y = layer.forward(x, true);
    REQUIRE(y.dim(2) == 3);
    CHECK(y.at(0, 0, 0) == 5.0);
    CHECK(y.at(0, 0, 1) == 2.0);
    CHECK(y.at(0, 0, 2) == 9.0);
}

TEST_CASE("GlobalAvgPool1d gradients match finite differences") {
    GlobalAvgPool1d layer;
    check_input_gradient(layer, random_input({2, 3, 5}, 60), 61);

    Tensor x({1, 2, 4});
    for (int k = 0; k < 4; ++k) {
        x.at(0, 0, k) = static_cast<double>(k + 1);
        x.at(0, 1, k) = 10.0;
    }
    const Tensor y = layer.forward(x, true);
    CHECK(y.at(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(y.at(0, 1) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("activation gradients match finite differences") {
    ReLU relu;
    check_input_gradient(relu, random_input({3, 6}, 70, 0.01), 71);

    LeakyReLU leaky(0.2);
    check_input_gradient(leaky, random_input({3, 6}, 72, 0.01), 73);

    Sigmoid sigmoid;
    check_input_gradient(sigmoid, random_input({3, 6}, 74), 75);

    Tanh tanh_layer;
    check_input_gradient(tanh_layer, random_input({3, 6}, 76), 77);
}

TEST_CASE("LeakyReLU applies the negative-side slope below zero") {
    LeakyReLU layer(0.2);
    Tensor x({1, 3});
    x.at(0, 0) = -2.0;
    x.at(0, 1) = 0.0;
    x.at(0, 2) = 3.0;
    const Tensor y = layer.forward(x, true);
    CHECK(y.at(0, 0) == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(y.at(0, 1) == 0.0);
    CHECK(y.at(0, 2) == 3.0);
}

TEST_CASE("Dropout is identity in eval mode and masks consistently in train mode") {
    Dropout layer(0.3, 99);
    const Tensor x = random_input({4, 10}, 80, 0.5);

    const Tensor eval_out = layer.forward(x, false);
    for (std::size_t k = 0; k < x.numel(); ++k) CHECK(eval_out.data[k] == x.data[k]);

    // Train mode: outputs are 0 or x / (1 - rate); backward reuses the same
    // realized mask, which is the exact gradient of the realized forward map.
    const Tensor train_out = layer.forward(x, true);
    const double keep_scale = 1.0 / 0.7;
    int dropped = 0;
    for (std::size_t k = 0; k < x.numel(); ++k) {
        const bool zeroed = train_out.data[k] == 0.0;
        if (zeroed) {
            ++dropped;
        } else {
            CHECK(train_out.data[k] == doctest::Approx(x.data[k] * keep_scale).epsilon(1e-12));
        }
    }
    CHECK(dropped > 0);
    CHECK(dropped < static_cast<int>(x.numel()));

    Tensor grad(x.shape);
    grad.fill(1.0);
    const Tensor back = layer.backward(grad);
    for (std::size_t k = 0; k < x.numel(); ++k) {
        const double expect = train_out.data[k] == 0.0 ? 0.0 : keep_scale;
        CHECK(back.data[k] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("Embedding gradients match finite differences and accumulate over repeats") {
    Embedding emb(6, 4);
    Rng rng(6);
    init_gaussian(emb.table, rng, 1.0);
    const std::vector<int> ids = {3, 1, 3, 0};

    const Tensor y = emb.forward(ids);
    REQUIRE(y.dim(0) == 4);
    REQUIRE(y.dim(1) == 4);
    const Tensor w = probe_weights(y.shape, 90);
    emb.grad_table.fill(0.0);
    emb.backward(w);

    std::vector<double> numeric(emb.table.numel());
    for (std::size_t k = 0; k < emb.table.numel(); ++k) {
        const double keep = emb.table.data[k];
        emb.table.data[k] = keep + kH;
        const double up = probe_loss(emb.forward(ids), w);
        emb.table.data[k] = keep - kH;
        const double down = probe_loss(emb.forward(ids), w);
        emb.table.data[k] = keep;
        numeric[k] = (up - down) / (2.0 * kH);
    }
    CHECK(rel_error(emb.grad_table, numeric) < kRelTol);

    CHECK_THROWS_AS(emb.forward({6}), std::invalid_argument);
    CHECK_THROWS_AS(emb.forward({-1}), std::invalid_argument);
}

TEST_CASE("bce_loss value and gradient match finite differences for both targets") {
    Rng rng(7);
    for (const double target : {1.0, 0.0}) {
        Tensor pred({6, 1});
        for (auto& v : pred.data) v = rng.uniform(0.15, 0.85);

        const LossResult res = bce_loss(pred, target);
        std::vector<double> numeric(pred.numel());
        for (std::size_t k = 0; k < pred.numel(); ++k) {
            const double keep = pred.data[k];
            pred.data[k] = keep + kH;
            const double up = bce_loss(pred, target).value;
            pred.data[k] = keep - kH;
            const double down = bce_loss(pred, target).value;
            pred.data[k] = keep;
            numeric[k] = (up - down) / (2.0 * kH);
        }
        CHECK(rel_error(res.grad, numeric) < kRelTol);
    }
}

TEST_CASE("bce_loss clamps extreme predictions instead of producing infinities") {
    Tensor pred({2, 1});
    pred.at(0, 0) = 0.0;
    pred.at(1, 0) = 1.0;
    const LossResult res = bce_loss(pred, 1.0);
    CHECK(std::isfinite(res.value));
    for (const double g : res.grad.data) CHECK(std::isfinite(g));
}

TEST_CASE("softmax_cross_entropy value and gradient match finite differences") {
    Rng rng(8);
    Tensor logits({5, 8});
    for (auto& v : logits.data) v = rng.next_gaussian();
    const std::vector<int> labels = {0, 3, 7, 3, 1};

    const LossResult res = softmax_cross_entropy(logits, labels);
    std::vector<double> numeric(logits.numel());
    for (std::size_t k = 0; k < logits.numel(); ++k) {
        const double keep = logits.data[k];
        logits.data[k] = keep + kH;
        const double up = softmax_cross_entropy(logits, labels).value;
        logits.data[k] = keep - kH;
        const double down = softmax_cross_entropy(logits, labels).value;
        logits.data[k] = keep;
        numeric[k] = (up - down) / (2.0 * kH);
    }
    CHECK(rel_error(res.grad, numeric) < kRelTol);
}

TEST_CASE("softmax_rows produces row-stochastic output") {
    Rng rng(9);
    Tensor logits({4, 6});
    for (auto& v : logits.data) v = 10.0 * rng.next_gaussian();
    const Tensor p = softmax_rows(logits);
    for (int r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (int c = 0; c < 6; ++c) {
            CHECK(p.at(r, c) > 0.0);
            acc += p.at(r, c);
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("gradients accumulate across backward calls until zeroed") {
    Dense layer(3, 2);
    Rng rng(10);
    init_gaussian(layer.weight, rng, 0.5);
    const Tensor x = random_input({4, 3}, 100);
    const Tensor y = layer.forward(x, true);
    Tensor w = probe_weights(y.shape, 101);

    for (Tensor* g : layer.grads()) g->fill(0.0);
    layer.backward(w);
    const Tensor once = layer.grad_weight;
    layer.forward(x, true);
    layer.backward(w);
    for (std::size_t k = 0; k < once.numel(); ++k) {
        CHECK(layer.grad_weight.data[k] == doctest::Approx(2.0 * once.data[k]).epsilon(1e-12));
    }
}

TEST_CASE("Adam reproduces the closed-form update and zero_grad clears gradients") {
    Tensor p({2});
    p.at(0) = 1.0;
    p.at(1) = -2.0;
    Tensor g({2});
    Adam opt({&p}, {&g}, 0.1, 0.9, 0.999, 1e-8);

    double m[2] = {0.0, 0.0}, v[2] = {0.0, 0.0};
    double expect[2] = {1.0, -2.0};
    const double steps[2][2] = {{0.5, -1.0}, {0.25, 0.125}};
    for (int t = 1; t <= 2; ++t) {
        g.at(0) = steps[t - 1][0];
        g.at(1) = steps[t - 1][1];
        opt.step();
        for (int k = 0; k < 2; ++k) {
            const double grad = steps[t - 1][k];
            m[k] = 0.9 * m[k] + 0.1 * grad;
            v[k] = 0.999 * v[k] + 0.001 * grad * grad;
            const double m_hat = m[k] / (1.0 - std::pow(0.9, t));
            const double v_hat = v[k] / (1.0 - std::pow(0.999, t));
            expect[k] -= 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8);
            CHECK(p.at(k) == doctest::Approx(expect[k]).epsilon(1e-12));
        }
    }

    g.at(0) = 123.0;
    opt.zero_grad();
    CHECK(g.at(0) == 0.0);
    CHECK(g.at(1) == 0.0);
}

TEST_CASE("Sequential composes forward and backward correctly") {
    Sequential net;
    net.add(std::make_unique<Dense>(4, 6));
    net.add(std::make_unique<LeakyReLU>(0.2));
    net.add(std::make_unique<Dense>(6, 2));
    Rng rng(11);
    for (Tensor* p : net.params()) init_gaussian(*p, rng, 0.5);

    Tensor x = random_input({3, 4}, 110, 0.01);
    const Tensor y = net.forward(x, true);
    const Tensor w = probe_weights(y.shape, 111);
    const Tensor analytic = net.backward(w);

    std::vector<double> numeric(x.numel());
    for (std::size_t k = 0; k < x.numel(); ++k) {
        const double keep = x.data[k];
        x.data[k] = keep + kH;
        const double up = probe_loss(net.forward(x, true), w);
        x.data[k] = keep - kH;
        const double down = probe_loss(net.forward(x, true), w);
        x.data[k] = keep;
        numeric[k] = (up - down) / (2.0 * kH);
    }
    CHECK(rel_error(analytic, numeric) < kRelTol);
    CHECK(net.params().size() == 4);
    CHECK(net.grads().size() == 4);
}

TEST_CASE("init_gaussian hits the requested moments") {
    Rng rng(12);
    Tensor t({200, 200});
    init_gaussian(t, rng, 0.02);
    double sum = 0.0, sum_sq = 0.0;
    for (const double v : t.data) {
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(t.numel());
    const double mean = sum / n;
    const double std_dev = std::sqrt(sum_sq / n - mean * mean);
    CHECK(std::abs(mean) < 1e-3);
    CHECK(std_dev == doctest::Approx(0.02).epsilon(0.02));
}
