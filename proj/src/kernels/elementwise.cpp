#include "llpq/kernels.hpp"

#include <cmath>

namespace llpq::kernels {

template <typename T>
void relu_forward(const T* in, T* out, i64 n) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
}

template <typename T>
void relu_backward(const T* in, const T* grad_out, T* grad_in, i64 n) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i)
        if (in[i] > T(0)) grad_in[i] += grad_out[i];
}

template <typename T>
void sigmoid_forward(const T* in, T* out, i64 n) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) {
        const T x = in[i];
        if (x >= T(0)) {
            out[i] = T(1) / (T(1) + std::exp(-x));
        } else {
            const T e = std::exp(x);
            out[i] = e / (T(1) + e);
        }
    }
}

template <typename T>
void sigmoid_backward(const T* out, const T* grad_out, T* grad_in, i64 n) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < n; ++i) grad_in[i] += grad_out[i] * out[i] * (T(1) - out[i]);
}

#define LLPQ_INSTANTIATE_EW(T)                                                                \
    template void relu_forward<T>(const T*, T*, i64);                                         \
    template void relu_backward<T>(const T*, const T*, T*, i64);                              \
    template void sigmoid_forward<T>(const T*, T*, i64);                                      \
    template void sigmoid_backward<T>(const T*, const T*, T*, i64);

LLPQ_INSTANTIATE_EW(float)
LLPQ_INSTANTIATE_EW(double)

} // namespace llpq::kernels
