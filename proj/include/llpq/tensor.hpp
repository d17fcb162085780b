#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "llpq/common.hpp"

namespace llpq {

inline std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return n;
}

// Dense N-D array in C order. `grad` is allocated lazily and always matches
// `data` in size when present.
template <typename T>
struct TensorT {
    std::vector<std::size_t> shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad;

    TensorT() = default;

    explicit TensorT(std::vector<std::size_t> s, T fill = T(0))
        : shape(std::move(s)), data(numel(shape), fill) {}

    static TensorT zeros(std::vector<std::size_t> s) { return TensorT(std::move(s)); }

    static TensorT full(std::vector<std::size_t> s, T v) { return TensorT(std::move(s), v); }

    std::size_t size() const { return data.size(); }

    void resize(const std::vector<std::size_t>& s) {
        shape = s;
        data.assign(numel(s), T(0));
        if (!grad.empty()) grad.assign(data.size(), T(0));
    }

    void ensure_grad() {
        requires_grad = true;
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }

    // 4-D accessor [c][z][y][x]; used by tests and slow paths only.
    T& at(std::size_t c, std::size_t z, std::size_t y, std::size_t x) {
        return data[((c * shape[1] + z) * shape[2] + y) * shape[3] + x];
    }
    const T& at(std::size_t c, std::size_t z, std::size_t y, std::size_t x) const {
        return data[((c * shape[1] + z) * shape[2] + y) * shape[3] + x];
    }

    bool all_finite() const {
        for (const T& v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

} // namespace llpq
