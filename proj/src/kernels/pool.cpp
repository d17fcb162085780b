#include "llpq/kernels.hpp"

namespace llpq::kernels {

template <typename T>
void gap_forward(const T* in, T* out, i64 c, i64 n_spatial) {
    require(n_spatial > 0, "gap over empty grid");
#pragma omp parallel for schedule(static)
    for (i64 ch = 0; ch < c; ++ch) {
        const T* row = in + ch * n_spatial;
        T acc = T(0);
        for (i64 i = 0; i < n_spatial; ++i) acc += row[i];
        out[ch] = acc / static_cast<T>(n_spatial);
    }
}

template <typename T>
void gap_backward(const T* grad_out, T* grad_in, i64 c, i64 n_spatial) {
    const T inv = T(1) / static_cast<T>(n_spatial);
#pragma omp parallel for schedule(static)
    for (i64 ch = 0; ch < c; ++ch) {
        const T g = grad_out[ch] * inv;
        T* row = grad_in + ch * n_spatial;
        for (i64 i = 0; i < n_spatial; ++i) row[i] += g;
    }
}

template <typename T>
void masked_gap_forward(const T* in, const std::uint8_t* mask, i64 m_count, T* out, i64 c,
                        i64 n_spatial) {
    require(m_count > 0, "empty mask");
#pragma omp parallel for schedule(static)
    for (i64 ch = 0; ch < c; ++ch) {
        const T* row = in + ch * n_spatial;
        T acc = T(0);
        for (i64 i = 0; i < n_spatial; ++i)
            if (mask[i]) acc += row[i];
        out[ch] = acc / static_cast<T>(m_count);
    }
}

template <typename T>
void masked_gap_backward(const T* grad_out, const std::uint8_t* mask, i64 m_count, T* grad_in,
                         i64 c, i64 n_spatial) {
    const T inv = T(1) / static_cast<T>(m_count);
#pragma omp parallel for schedule(static)
    for (i64 ch = 0; ch < c; ++ch) {
        const T g = grad_out[ch] * inv;
        T* row = grad_in + ch * n_spatial;
        for (i64 i = 0; i < n_spatial; ++i)
            if (mask[i]) row[i] += g;
    }
}

template <typename T>
void fc_forward(const T* in, const T* weight, const T* bias, T* out, i64 n_out, i64 n_in) {
    for (i64 o = 0; o < n_out; ++o) {
        T acc = bias ? bias[o] : T(0);
        const T* wrow = weight + o * n_in;
        for (i64 i = 0; i < n_in; ++i) acc += wrow[i] * in[i];
        out[o] = acc;
    }
}

template <typename T>
void fc_backward(const T* in, const T* weight, const T* grad_out, T* grad_in, T* grad_weight,
                 T* grad_bias, i64 n_out, i64 n_in) {
    if (grad_in)
        for (i64 i = 0; i < n_in; ++i) {
            T acc = T(0);
            for (i64 o = 0; o < n_out; ++o) acc += weight[o * n_in + i] * grad_out[o];
            grad_in[i] = acc;
        }
    for (i64 o = 0; o < n_out; ++o) {
        if (grad_bias) grad_bias[o] += grad_out[o];
        if (grad_weight) {
            T* wrow = grad_weight + o * n_in;
            const T g = grad_out[o];
            for (i64 i = 0; i < n_in; ++i) wrow[i] += g * in[i];
        }
    }
}

#define LLPQ_INSTANTIATE_POOL(T)                                                              \
    template void gap_forward<T>(const T*, T*, i64, i64);                                     \
    template void gap_backward<T>(const T*, T*, i64, i64);                                    \
    template void masked_gap_forward<T>(const T*, const std::uint8_t*, i64, T*, i64, i64);    \
    template void masked_gap_backward<T>(const T*, const std::uint8_t*, i64, T*, i64, i64);   \
    template void fc_forward<T>(const T*, const T*, const T*, T*, i64, i64);                  \
    template void fc_backward<T>(const T*, const T*, const T*, T*, T*, T*, i64, i64);

LLPQ_INSTANTIATE_POOL(float)
LLPQ_INSTANTIATE_POOL(double)

} // namespace llpq::kernels
