#include "llpq/kernels_ref.hpp"

namespace llpq::kernels::ref {

namespace {

template <typename T>
T at4(const T* p, i64 c, i64 z, i64 y, i64 x, i64 d, i64 h, i64 w) {
    return p[((c * d + z) * h + y) * w + x];
}

} // namespace

template <typename T>
void conv3d_forward(const T* in, const T* weight, const T* bias, T* out, const ConvDims& cd) {
    const i64 K3 = cd.k * cd.k * cd.k;
    i64 idx = 0;
    for (i64 co = 0; co < cd.c_out; ++co)
        for (i64 od = 0; od < cd.od; ++od)
            for (i64 oh = 0; oh < cd.oh; ++oh)
                for (i64 ow = 0; ow < cd.ow; ++ow) {
                    T acc = bias ? bias[co] : T(0);
                    for (i64 ci = 0; ci < cd.c_in; ++ci)
                        for (i64 kz = 0; kz < cd.k; ++kz)
                            for (i64 ky = 0; ky < cd.k; ++ky)
                                for (i64 kx = 0; kx < cd.k; ++kx) {
                                    const i64 iz = od * cd.stride - cd.pad + kz;
                                    const i64 iy = oh * cd.stride - cd.pad + ky;
                                    const i64 ix = ow * cd.stride - cd.pad + kx;
                                    if (iz < 0 || iz >= cd.d || iy < 0 || iy >= cd.h ||
                                        ix < 0 || ix >= cd.w)
                                        continue;
                                    acc += at4(in, ci, iz, iy, ix, cd.d, cd.h, cd.w) *
                                           weight[(co * cd.c_in + ci) * K3 +
                                                  (kz * cd.k + ky) * cd.k + kx];
                                }
                    out[idx++] = acc;
                }
}

template <typename T>
void conv3d_backward_input(const T* weight, const T* grad_out, T* grad_in, const ConvDims& cd) {
    const i64 K3 = cd.k * cd.k * cd.k;
    const i64 n_in = cd.c_in * cd.d * cd.h * cd.w;
    for (i64 i = 0; i < n_in; ++i) grad_in[i] = T(0);
    i64 idx = 0;
    for (i64 co = 0; co < cd.c_out; ++co)
        for (i64 od = 0; od < cd.od; ++od)
            for (i64 oh = 0; oh < cd.oh; ++oh)
                for (i64 ow = 0; ow < cd.ow; ++ow) {
                    const T g = grad_out[idx++];
                    for (i64 ci = 0; ci < cd.c_in; ++ci)
                        for (i64 kz = 0; kz < cd.k; ++kz)
                            for (i64 ky = 0; ky < cd.k; ++ky)
                                for (i64 kx = 0; kx < cd.k; ++kx) {
                                    const i64 iz = od * cd.stride - cd.pad + kz;
                                    const i64 iy = oh * cd.stride - cd.pad + ky;
                                    const i64 ix = ow * cd.stride - cd.pad + kx;
                                    if (iz < 0 || iz >= cd.d || iy < 0 || iy >= cd.h ||
                                        ix < 0 || ix >= cd.w)
                                        continue;
                                    grad_in[((ci * cd.d + iz) * cd.h + iy) * cd.w + ix] +=
                                        g * weight[(co * cd.c_in + ci) * K3 +
                                                   (kz * cd.k + ky) * cd.k + kx];
                                }
                }
}

template <typename T>
void conv3d_backward_params(const T* in, const T* grad_out, T* grad_weight, T* grad_bias,
                            const ConvDims& cd) {
    const i64 K3 = cd.k * cd.k * cd.k;
    i64 idx = 0;
    for (i64 co = 0; co < cd.c_out; ++co)
        for (i64 od = 0; od < cd.od; ++od)
            for (i64 oh = 0; oh < cd.oh; ++oh)
                for (i64 ow = 0; ow < cd.ow; ++ow) {
                    const T g = grad_out[idx++];
                    if (grad_bias) grad_bias[co] += g;
                    for (i64 ci = 0; ci < cd.c_in; ++ci)
                        for (i64 kz = 0; kz < cd.k; ++kz)
                            for (i64 ky = 0; ky < cd.k; ++ky)
                                for (i64 kx = 0; kx < cd.k; ++kx) {
                                    const i64 iz = od * cd.stride - cd.pad + kz;
                                    const i64 iy = oh * cd.stride - cd.pad + ky;
                                    const i64 ix = ow * cd.stride - cd.pad + kx;
                                    if (iz < 0 || iz >= cd.d || iy < 0 || iy >= cd.h ||
                                        ix < 0 || ix >= cd.w)
                                        continue;
                                    grad_weight[(co * cd.c_in + ci) * K3 +
                                                (kz * cd.k + ky) * cd.k + kx] +=
                                        g * at4(in, ci, iz, iy, ix, cd.d, cd.h, cd.w);
                                }
                }
}

template <typename T>
void gap_forward(const T* in, T* out, i64 c, i64 n_spatial) {
    for (i64 ch = 0; ch < c; ++ch) {
        T acc = T(0);
        for (i64 i = 0; i < n_spatial; ++i) acc += in[ch * n_spatial + i];
        out[ch] = acc / static_cast<T>(n_spatial);
    }
}

template <typename T>
void masked_gap_forward(const T* in, const std::uint8_t* mask, i64 m_count, T* out, i64 c,
                        i64 n_spatial) {
    for (i64 ch = 0; ch < c; ++ch) {
        T acc = T(0);
        for (i64 i = 0; i < n_spatial; ++i)
            if (mask[i]) acc += in[ch * n_spatial + i];
        out[ch] = acc / static_cast<T>(m_count);
    }
}

#define LLPQ_INSTANTIATE_REF(T)                                                               \
    template void conv3d_forward<T>(const T*, const T*, const T*, T*, const ConvDims&);       \
    template void conv3d_backward_input<T>(const T*, const T*, T*, const ConvDims&);          \
    template void conv3d_backward_params<T>(const T*, const T*, T*, T*, const ConvDims&);     \
    template void gap_forward<T>(const T*, T*, i64, i64);                                     \
    template void masked_gap_forward<T>(const T*, const std::uint8_t*, i64, T*, i64, i64);

LLPQ_INSTANTIATE_REF(float)
LLPQ_INSTANTIATE_REF(double)

} // namespace llpq::kernels::ref
