#include "jamsig/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "jamsig/rng.hpp"

namespace jamsig {

namespace {

// Row-stochastic affinities with per-point bandwidth chosen by binary search
// so the conditional entropy matches log(perplexity) to within 1e-4.
std::vector<double> conditional_affinities(const std::vector<double>& d2, int n,
                                           double perplexity) {
    const double target_entropy = std::log(perplexity);
    std::vector<double> p(static_cast<std::size_t>(n) * n, 0.0);

    for (int i = 0; i < n; ++i) {
        double beta = 1.0, beta_min = -1e300, beta_max = 1e300;

        for (int iter = 0; iter < 64; ++iter) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double v = std::exp(-beta * d2[static_cast<std::size_t>(i) * n + j]);
                p[static_cast<std::size_t>(i) * n + j] = v;
                sum += v;
            }
            if (sum <= 0.0) sum = 1e-300;

            double entropy = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double pij = p[static_cast<std::size_t>(i) * n + j] / sum;
                if (pij > 1e-300) entropy -= pij * std::log(pij);
                p[static_cast<std::size_t>(i) * n + j] = pij;
            }

            const double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-4) break;
            if (diff > 0.0) {
                beta_min = beta;
                beta = beta_max > 1e299 ? beta * 2.0 : (beta + beta_max) / 2.0;
            } else {
                beta_max = beta;
                beta = beta_min < -1e299 ? beta / 2.0 : (beta + beta_min) / 2.0;
            }
        }
    }
    return p;
}

}  // namespace

Tensor tsne(const Tensor& points, const TsneConfig& cfg) {
    if (points.ndim() != 2) {
        throw std::invalid_argument("tsne: points must be {n, d}, got " + points.shape_str());
    }
    const int n = points.dim(0), d = points.dim(1);
    if (n < 8) throw std::invalid_argument("tsne: need at least 8 points");
    if (cfg.iterations <= 0 || cfg.eta <= 0.0 || cfg.perplexity <= 1.0) {
        throw std::invalid_argument("tsne: invalid config");
    }

    const double perplexity =
        std::max(2.0, std::min(cfg.perplexity, (static_cast<double>(n) - 1.0) / 3.0));

    // Pairwise squared distances in the input space.
    std::vector<double> d2(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = points.at(i, k) - points.at(j, k);
                acc += diff * diff;
            }
            d2[static_cast<std::size_t>(i) * n + j] = acc;
            d2[static_cast<std::size_t>(j) * n + i] = acc;
        }
    }

    // Symmetrized joint distribution with early exaggeration applied.
    auto p = conditional_affinities(d2, n, perplexity);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double sym = (p[static_cast<std::size_t>(i) * n + j] +
                                p[static_cast<std::size_t>(j) * n + i]) /
                               (2.0 * n);
            const double v = std::max(sym, 1e-12) * cfg.exaggeration;
            p[static_cast<std::size_t>(i) * n + j] = v;
            p[static_cast<std::size_t>(j) * n + i] = v;
        }
        p[static_cast<std::size_t>(i) * n + i] = 0.0;
    }

    Rng rng(cfg.seed);
    Tensor y({n, 2});
    auto& yd = y.data;
    for (auto& v : yd) v = 1e-4 * rng.next_gaussian();

    std::vector<double> velocity(static_cast<std::size_t>(n) * 2, 0.0);
    std::vector<double> gains(static_cast<std::size_t>(n) * 2, 1.0);
    std::vector<double> grad(static_cast<std::size_t>(n) * 2, 0.0);
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);

    bool exaggerated = true;
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        if (exaggerated && iter >= cfg.exaggeration_iters) {
            for (auto& v : p) v /= cfg.exaggeration;
            exaggerated = false;
        }

        // Student-t kernel in the embedding.
        double q_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double dx = yd[2 * i] - yd[2 * j];
                const double dy = yd[2 * i + 1] - yd[2 * j + 1];
                const double w = 1.0 / (1.0 + dx * dx + dy * dy);
                q[static_cast<std::size_t>(i) * n + j] = w;
                q[static_cast<std::size_t>(j) * n + i] = w;
                q_sum += 2.0 * w;
            }
        }
        q_sum = std::max(q_sum, 1e-300);

        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double w = q[static_cast<std::size_t>(i) * n + j];
                const double mult =
                    (p[static_cast<std::size_t>(i) * n + j] - std::max(w / q_sum, 1e-300)) * w;
                grad[2 * i] += 4.0 * mult * (yd[2 * i] - yd[2 * j]);
                grad[2 * i + 1] += 4.0 * mult * (yd[2 * i + 1] - yd[2 * j + 1]);
            }
        }

        const double momentum =
            iter < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
        double mean_x = 0.0, mean_y = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                const std::size_t k = 2 * static_cast<std::size_t>(i) + c;
                const bool same_sign = (grad[k] > 0.0) == (velocity[k] > 0.0);
                gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
                velocity[k] = momentum * velocity[k] - cfg.eta * gains[k] * grad[k];
                yd[k] += velocity[k];
            }
            mean_x += yd[2 * i];
            mean_y += yd[2 * i + 1];
        }
        mean_x /= n;
        mean_y /= n;
        for (int i = 0; i < n; ++i) {
            yd[2 * i] -= mean_x;
            yd[2 * i + 1] -= mean_y;
        }
    }
    return y;
}

}  // namespace jamsig
