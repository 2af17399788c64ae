#pragma once

#include <cstdint>

#include "jamsig/tensor.hpp"

namespace jamsig {

struct TsneConfig {
    double perplexity = 30.0;   // clamps to (n - 1) / 3 for small inputs
    int iterations = 1000;
    double eta = 200.0;
    double exaggeration = 12.0;
    int exaggeration_iters = 250;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    std::uint64_t seed = 0;
};

// Exact O(n^2) t-SNE embedding of {n, d} points into {n, 2}. Deterministic
// for a fixed config. Requires n >= 8.
Tensor tsne(const Tensor& points, const TsneConfig& cfg = {});

}  // namespace jamsig
