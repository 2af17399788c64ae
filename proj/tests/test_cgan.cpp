#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "jamsig/cgan.hpp"
#include "jamsig/dsp.hpp"

using namespace jamsig;

namespace {

// Normalized fake training rows: one row per class, tanh-squashed.
std::pair<Tensor, std::vector<int>> toy_rows(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    const int n = kNumClasses * per_class;
    Tensor x({n, 800});
    std::vector<int> y;
    for (int c = 0; c < kNumClasses; ++c) {
        for (int k = 0; k < per_class; ++k) y.push_back(c);
    }
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < 800; ++j) {
            x.at(r, j) = std::tanh(0.2 * rng.next_gaussian() + 0.1 * y[static_cast<std::size_t>(r)]);
        }
    }
    return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("network parameter counts match the documented architecture") {
    GeneratorNet gen(1);
    DiscriminatorNet disc(2);
    CHECK(gen.param_count() == 3278176);
    CHECK(disc.param_count() == 1653377);
    CHECK(gen.param_count() + disc.param_count() == 4931553);
}

TEST_CASE("generator emits tanh-bounded spectra of the right shape") {
    GeneratorNet gen(3);
    Rng rng(4);
    Tensor z({5, kNoiseDim});
    init_gaussian(z, rng, 1.0);
    const std::vector<int> labels = {0, 3, 7, 1, 3};
    const Tensor out = gen.forward(z, labels, false);
    REQUIRE(out.dim(0) == 5);
    REQUIRE(out.dim(1) == 800);
    for (const double v : out.data) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("discriminator scores lie strictly inside (0, 1)") {
    DiscriminatorNet disc(5);
    Rng rng(6);
    Tensor x({4, 800});
    init_gaussian(x, rng, 0.5);
    const std::vector<int> labels = {0, 1, 2, 3};
    const Tensor score = disc.forward(x, labels, false);
    REQUIRE(score.dim(0) == 4);
    REQUIRE(score.dim(1) == 1);
    for (const double v : score.data) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("a zeroed discriminator produces the closed-form symmetric losses") {
    // All-zero weights make every logit 0 and every sigmoid output exactly
    // 0.5, so with a single-row batch: real-plus-fake BCE = 2 ln 2 and the
    // generator's BCE = ln 2, with no floating-point slack.
    GeneratorNet gen(7);
    DiscriminatorNet disc(8);
    for (Tensor* p : disc.params()) p->fill(0.0);

    Rng rng(9);
    Tensor real({1, 800});
    init_gaussian(real, rng, 0.3);
    const std::vector<int> label = {2};

    const LossResult d_real = bce_loss(disc.forward(real, label, true), 1.0);
    Tensor z({1, kNoiseDim});
    init_gaussian(z, rng, 1.0);
    const Tensor fake = gen.forward(z, label, true);
    const LossResult d_fake = bce_loss(disc.forward(fake, label, true), 0.0);

    const double ln2 = std::log(2.0);
    CHECK(d_real.value == ln2);
    CHECK(d_fake.value == ln2);
    CHECK(d_real.value + d_fake.value == 2.0 * ln2);

    const LossResult g_probe = bce_loss(disc.forward(fake, label, true), 1.0);
    CHECK(g_probe.value == ln2);
}

TEST_CASE("generator backward only touches generator parameters") {
    GeneratorNet gen(10);
    Rng rng(11);
    Tensor z({3, kNoiseDim});
    init_gaussian(z, rng, 1.0);
    const std::vector<int> labels = {1, 4, 6};
    const Tensor out = gen.forward(z, labels, true);

    for (Tensor* g : gen.grads()) g->fill(0.0);
    Tensor grad(out.shape);
    grad.fill(0.01);
    gen.backward(grad);

    double total = 0.0;
    for (Tensor* g : gen.grads()) {
        for (const double v : g->data) total += std::abs(v);
    }
    CHECK(total > 0.0);

    // Embedding rows for unused labels stay untouched.
    const auto& table_grad = gen.label_embed.grad_table;
    for (int c : {0, 2, 3, 5, 7}) {
        for (int j = 0; j < kLabelEmbedDim; ++j) CHECK(table_grad.at(c, j) == 0.0);
    }
}

TEST_CASE("discriminator backward returns the gradient w.r.t. the spectrum input") {
    DiscriminatorNet disc(12);
    Rng rng(13);
    Tensor x({2, 800});
    init_gaussian(x, rng, 0.4);
    const std::vector<int> labels = {3, 5};
    const Tensor score = disc.forward(x, labels, true);
    const LossResult loss = bce_loss(score, 1.0);
    const Tensor grad_x = disc.backward(loss.grad);
    REQUIRE(grad_x.dim(0) == 2);
    REQUIRE(grad_x.dim(1) == 800);
    double total = 0.0;
    for (const double v : grad_x.data) total += std::abs(v);
    CHECK(total > 0.0);
}

TEST_CASE("check_equilibrium accepts stable histories and rejects drifting ones") {
    GanHistory stable;
    stable.steps_per_epoch = 1;
    for (int k = 0; k < 200; ++k) {
        stable.d_loss.push_back(1.35 + 0.01 * ((k % 3) - 1));
        stable.g_loss.push_back(0.70 + 0.01 * ((k % 5) - 2));
    }
    const EquilibriumReport ok = check_equilibrium(stable);
    CHECK(ok.converged);
    CHECK(ok.d_mean == doctest::Approx(1.35).epsilon(0.02));
    CHECK(ok.g_mean == doctest::Approx(0.70).epsilon(0.02));

    GanHistory drifting = stable;
    for (int k = 0; k < 200; ++k) {
        drifting.g_loss[static_cast<std::size_t>(k)] = 0.4 + 0.05 * k;  // runaway
    }
    CHECK_FALSE(check_equilibrium(drifting).converged);

    GanHistory collapsed = stable;
    for (auto& v : collapsed.d_loss) v = 0.05;  // discriminator wins: mean below band
    CHECK_FALSE(check_equilibrium(collapsed).converged);

    GanHistory empty;
    CHECK_THROWS_AS(check_equilibrium(empty), std::invalid_argument);
}

TEST_CASE("micro-training runs, records history, and stays finite") {
    auto [x, y] = toy_rows(1, 20);
    GanTrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 21;
    GanTrainer trainer(cfg);
    int callbacks = 0;
    const GanHistory hist =
        trainer.train(x, y, [&](int epoch, double d, double g) {
            CHECK(epoch == callbacks);
            CHECK(std::isfinite(d));
            CHECK(std::isfinite(g));
            ++callbacks;
        });
    CHECK(callbacks == 3);
    CHECK(hist.steps_per_epoch == 1);  // 8 rows < batch 32: one step per epoch
    REQUIRE(hist.d_loss.size() == 3);
    REQUIRE(hist.g_loss.size() == 3);
    for (const double v : hist.d_loss) CHECK(std::isfinite(v));
    for (const double v : hist.g_loss) CHECK(std::isfinite(v));

    const Tensor sample = trainer.generate({0, 1, 2});
    REQUIRE(sample.dim(0) == 3);
    REQUIRE(sample.dim(1) == 800);
    for (const double v : sample.data) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto [x, y] = toy_rows(2, 30);
    GanTrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 31;
    GanTrainer a(cfg), b(cfg);
    const GanHistory ha = a.train(x, y);
    const GanHistory hb = b.train(x, y);
    CHECK(ha.d_loss == hb.d_loss);
    CHECK(ha.g_loss == hb.g_loss);
    const Tensor sa = a.generate({0, 4});
    const Tensor sb = b.generate({0, 4});
    CHECK(sa.data == sb.data);
}

TEST_CASE("GAN weights survive a save/load round trip") {
    GanTrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 40;
    GanTrainer trainer(cfg);
    auto [x, y] = toy_rows(1, 41);
    trainer.train(x, y);

    const auto path = std::filesystem::temp_directory_path() / "jamsig_gan_roundtrip.jwgt";
    save_gan_weights(path, trainer.generator(), trainer.discriminator(), R"({"note":"t"})");

    GeneratorNet gen2(0);
    DiscriminatorNet disc2(0);
    const std::string meta = load_gan_weights(path, gen2, disc2);
    std::filesystem::remove(path);
    CHECK(meta == R"({"note":"t"})");

    Rng rng(42);
    Tensor z({4, kNoiseDim});
    init_gaussian(z, rng, 1.0);
    const std::vector<int> labels = {0, 2, 5, 7};
    const Tensor before = trainer.generator().forward(z, labels, false);
    const Tensor after = gen2.forward(z, labels, false);
    CHECK(before.data == after.data);

    Tensor probe({2, 800});
    init_gaussian(probe, rng, 0.3);
    const std::vector<int> plabels = {1, 6};
    const Tensor s_before = trainer.discriminator().forward(probe, plabels, false);
    const Tensor s_after = disc2.forward(probe, plabels, false);
    CHECK(s_before.data == s_after.data);
}
