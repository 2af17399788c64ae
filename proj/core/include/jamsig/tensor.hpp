#pragma once

#include <cstdint>
#include <initializer_list>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "jamsig/rng.hpp"

namespace jamsig {

// Fixed 64-byte alignment for tensor storage. SIMD matrix kernels pick
// their load/peel strategy from the runtime address, so mixed alignments
// would make bit-level results depend on where the heap placed a buffer.
template <typename T>
struct TensorAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    TensorAllocator() noexcept = default;
    template <typename U>
    TensorAllocator(const TensorAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

    friend bool operator==(const TensorAllocator&, const TensorAllocator&) { return true; }
};

using TensorBuffer = std::vector<double, TensorAllocator<double>>;

// Dense n-dimensional array of doubles, row-major. Value semantics
// throughout: layers copy or move these, nothing aliases.
struct Tensor {
    std::vector<int> shape;
    TensorBuffer data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(count(shape), 0.0) {}
    Tensor(std::vector<int> s, TensorBuffer d) : shape(std::move(s)), data(std::move(d)) {
        if (count(shape) != static_cast<std::int64_t>(data.size())) {
            throw std::invalid_argument("Tensor: shape does not match data length");
        }
    }

    static std::int64_t count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

    static Tensor gaussian(std::vector<int> s, Rng& rng, double stddev = 1.0, double mean = 0.0) {
        Tensor t(std::move(s));
        for (double& v : t.data) v = mean + stddev * rng.next_gaussian();
        return t;
    }

    std::size_t numel() const { return data.size(); }
    int ndim() const { return static_cast<int>(shape.size()); }

    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }

    double& at(int i) { return data[static_cast<std::size_t>(i)]; }
    double at(int i) const { return data[static_cast<std::size_t>(i)]; }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    double& at(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    double at(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    void fill(double v) { data.assign(data.size(), v); }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const std::string& what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(what + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
    }
}

}  // namespace jamsig
