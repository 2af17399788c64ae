#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "jamsig/cnn.hpp"

using namespace jamsig;

namespace {

// Class-separable toy spectra: a bump whose position encodes the label.
std::pair<Tensor, std::vector<int>> bump_rows(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    const int n = 8 * per_class;
    Tensor x({n, 800});
    std::vector<int> y;
    for (int c = 0; c < 8; ++c) {
        for (int k = 0; k < per_class; ++k) y.push_back(c);
    }
    for (int r = 0; r < n; ++r) {
        const int c = y[static_cast<std::size_t>(r)];
        const int center = 50 + c * 100;
        for (int j = 0; j < 800; ++j) {
            const double d = (j - center) / 12.0;
            x.at(r, j) = std::exp(-0.5 * d * d) + 0.05 * rng.next_gaussian() - 0.5;
        }
    }
    return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("classifier parameter count matches the documented architecture") {
    CnnNet net(1);
    CHECK(net.param_count() == 18504);
    // 16 trainable tensors plus 3 running-mean / 3 running-var buffers.
    CHECK(net.params().size() == 16);
    CHECK(net.state_tensors().size() == 22);
}

TEST_CASE("forward maps {N, 800} to {N, 8} logits") {
    CnnNet net(2);
    Rng rng(3);
    Tensor x({6, 800});
    init_gaussian(x, rng, 0.5);
    const Tensor logits = net.forward(x, false);
    REQUIRE(logits.dim(0) == 6);
    REQUIRE(logits.dim(1) == 8);
    for (const double v : logits.data) CHECK(std::isfinite(v));
}

TEST_CASE("training overfits a tiny separable dataset") {
    auto [x, y] = bump_rows(2, 10);
    // 16 rows is a single batch, so epochs == optimizer steps. The bump set
    // needs ~300 steps before the running batch-norm statistics settle and
    // eval-mode predictions match train-mode ones.
    CnnTrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 11;
    CnnTrainer trainer(cfg);
    const CnnHistory hist = trainer.train(x, y);
    REQUIRE(hist.loss.size() == 300);
    REQUIRE(hist.train_accuracy.size() == 300);
    CHECK(hist.loss.back() < hist.loss.front());
    CHECK(trainer.evaluate(x, y) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict and evaluate agree") {
    auto [x, y] = bump_rows(2, 20);
    CnnTrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 21;
    CnnTrainer trainer(cfg);
    trainer.train(x, y);
    const std::vector<int> preds = trainer.predict(x);
    REQUIRE(preds.size() == y.size());
    int hits = 0;
    for (std::size_t k = 0; k < y.size(); ++k) hits += preds[k] == y[k] ? 1 : 0;
    CHECK(trainer.evaluate(x, y) ==
          doctest::Approx(static_cast<double>(hits) / static_cast<double>(y.size()))
              .epsilon(1e-12));
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto [x, y] = bump_rows(1, 30);
    CnnTrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 31;
    CnnTrainer a(cfg), b(cfg);
    const CnnHistory ha = a.train(x, y);
    const CnnHistory hb = b.train(x, y);
    CHECK(ha.loss == hb.loss);
    CHECK(ha.train_accuracy == hb.train_accuracy);
    CHECK(a.predict(x) == b.predict(x));
}

TEST_CASE("weights and batch-norm running stats survive a save/load round trip") {
    auto [x, y] = bump_rows(1, 40);
    CnnTrainConfig cfg;
    cfg.epochs = 8;
    cfg.seed = 41;
    CnnTrainer trainer(cfg);
    trainer.train(x, y);

    const auto path = std::filesystem::temp_directory_path() / "jamsig_cnn_roundtrip.jwgt";
    save_cnn_weights(path, trainer.net(), R"({"epochs":8})");

    CnnNet net2(0);
    const std::string meta = load_cnn_weights(path, net2);
    std::filesystem::remove(path);
    CHECK(meta == R"({"epochs":8})");

    // Eval-mode forward exercises the running statistics, so bit-equal
    // logits prove the full state round-tripped.
    const Tensor before = trainer.net().forward(x, false);
    const Tensor after = net2.forward(x, false);
    CHECK(before.data == after.data);
}

TEST_CASE("train rejects mismatched labels") {
    CnnTrainConfig cfg;
    cfg.epochs = 1;
    CnnTrainer trainer(cfg);
    Tensor x({4, 800});
    CHECK_THROWS_AS(trainer.train(x, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(trainer.train(x, {0, 1, 2, 9}), std::invalid_argument);
}
