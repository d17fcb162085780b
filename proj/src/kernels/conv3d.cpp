#include "llpq/kernels.hpp"

#include <algorithm>
#include <string>

namespace llpq::kernels {

ConvDims conv_dims(i64 c_in, i64 d, i64 h, i64 w, i64 c_out, i64 k, i64 stride, i64 pad) {
    require(stride >= 1, "stride must be >= 1");
    require(k >= 1, "kernel must be >= 1");
    require(pad >= 0, "pad must be >= 0");
    ConvDims cd{c_in, d, h, w, c_out, k, stride, pad};
    const auto out_extent = [&](i64 in) { return (in + 2 * pad - k) / stride + 1; };
    if (d + 2 * pad < k || h + 2 * pad < k || w + 2 * pad < k)
        fail("kernel size " + std::to_string(k) + " larger than input extent");
    cd.od = out_extent(d);
    cd.oh = out_extent(h);
    cd.ow = out_extent(w);
    return cd;
}

template <typename T>
void conv3d_forward(const T* in, const T* weight, const T* bias, T* out, const ConvDims& cd) {
    const i64 HW = cd.h * cd.w;
    const i64 in_ch = cd.d * HW;
    const i64 OHW = cd.oh * cd.ow;
    const i64 out_ch = cd.od * OHW;
    const i64 K3 = cd.k * cd.k * cd.k;

#pragma omp parallel for collapse(2) schedule(static)
    for (i64 co = 0; co < cd.c_out; ++co)
        for (i64 od = 0; od < cd.od; ++od) {
            for (i64 oh = 0; oh < cd.oh; ++oh) {
                T* orow = out + co * out_ch + od * OHW + oh * cd.ow;
                for (i64 ow = 0; ow < cd.ow; ++ow) orow[ow] = bias ? bias[co] : T(0);
                const i64 z0 = od * cd.stride - cd.pad;
                const i64 y0 = oh * cd.stride - cd.pad;
                for (i64 ci = 0; ci < cd.c_in; ++ci) {
                    const T* ich = in + ci * in_ch;
                    const T* wch = weight + (co * cd.c_in + ci) * K3;
                    for (i64 kz = 0; kz < cd.k; ++kz) {
                        const i64 iz = z0 + kz;
                        if (iz < 0 || iz >= cd.d) continue;
                        for (i64 ky = 0; ky < cd.k; ++ky) {
                            const i64 iy = y0 + ky;
                            if (iy < 0 || iy >= cd.h) continue;
                            const T* irow = ich + iz * HW + iy * cd.w;
                            const T* wrow = wch + (kz * cd.k + ky) * cd.k;
                            for (i64 kx = 0; kx < cd.k; ++kx) {
                                const T wv = wrow[kx];
                                const i64 x0 = kx - cd.pad;
                                // clip ow range so ix = ow*stride + x0 stays in [0, w)
                                i64 lo = 0, hi = cd.ow;
                                if (x0 < 0) lo = (-x0 + cd.stride - 1) / cd.stride;
                                const i64 max_ix = cd.w - 1 - x0;
                                if (max_ix < 0) continue;
                                hi = std::min<i64>(hi, max_ix / cd.stride + 1);
                                const T* src = irow + x0;
                                if (cd.stride == 1) {
                                    for (i64 ow = lo; ow < hi; ++ow)
                                        orow[ow] += wv * src[ow];
                                } else {
                                    for (i64 ow = lo; ow < hi; ++ow)
                                        orow[ow] += wv * src[ow * cd.stride];
                                }
                            }
                        }
                    }
                }
            }
        }
}

template <typename T>
void conv3d_backward_input(const T* weight, const T* grad_out, T* grad_in, const ConvDims& cd) {
    const i64 HW = cd.h * cd.w;
    const i64 in_ch = cd.d * HW;
    const i64 OHW = cd.oh * cd.ow;
    const i64 out_ch = cd.od * OHW;
    const i64 K3 = cd.k * cd.k * cd.k;

    // Each thread owns whole (ci, iz) input slabs; contributions to one
    // input element always accumulate in the same (kz, ky, co, kx, ow) order.
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 ci = 0; ci < cd.c_in; ++ci)
        for (i64 iz = 0; iz < cd.d; ++iz) {
            T* slab = grad_in + ci * in_ch + iz * HW;
            std::fill(slab, slab + HW, T(0));
            for (i64 kz = 0; kz < cd.k; ++kz) {
                const i64 num_z = iz + cd.pad - kz;
                if (num_z < 0 || num_z % cd.stride) continue;
                const i64 od = num_z / cd.stride;
                if (od >= cd.od) continue;
                for (i64 ky = 0; ky < cd.k; ++ky) {
                    for (i64 oh = 0; oh < cd.oh; ++oh) {
                        const i64 iy = oh * cd.stride - cd.pad + ky;
                        if (iy < 0 || iy >= cd.h) continue;
                        T* irow = slab + iy * cd.w;
                        for (i64 co = 0; co < cd.c_out; ++co) {
                            const T* grow = grad_out + co * out_ch + od * OHW + oh * cd.ow;
                            const T* wrow =
                                weight + (co * cd.c_in + ci) * K3 + (kz * cd.k + ky) * cd.k;
                            for (i64 kx = 0; kx < cd.k; ++kx) {
                                const T wv = wrow[kx];
                                const i64 x0 = kx - cd.pad;
                                i64 lo = 0, hi = cd.ow;
                                if (x0 < 0) lo = (-x0 + cd.stride - 1) / cd.stride;
                                const i64 max_ix = cd.w - 1 - x0;
                                if (max_ix < 0) continue;
                                hi = std::min<i64>(hi, max_ix / cd.stride + 1);
                                if (cd.stride == 1) {
                                    T* dst = irow + x0;
                                    for (i64 ow = lo; ow < hi; ++ow) dst[ow] += wv * grow[ow];
                                } else {
                                    for (i64 ow = lo; ow < hi; ++ow)
                                        irow[ow * cd.stride + x0] += wv * grow[ow];
                                }
                            }
                        }
                    }
                }
            }
        }
}

template <typename T>
void conv3d_backward_params(const T* in, const T* grad_out, T* grad_weight, T* grad_bias,
                            const ConvDims& cd) {
    const i64 HW = cd.h * cd.w;
    const i64 in_ch = cd.d * HW;
    const i64 OHW = cd.oh * cd.ow;
    const i64 out_ch = cd.od * OHW;
    const i64 K3 = cd.k * cd.k * cd.k;

#pragma omp parallel for schedule(static)
    for (i64 co = 0; co < cd.c_out; ++co) {
        const T* gch = grad_out + co * out_ch;
        if (grad_bias) {
            T acc = T(0);
            for (i64 i = 0; i < out_ch; ++i) acc += gch[i];
            grad_bias[co] += acc;
        }
        for (i64 ci = 0; ci < cd.c_in; ++ci) {
            const T* ich = in + ci * in_ch;
            T* wch = grad_weight + (co * cd.c_in + ci) * K3;
            for (i64 kz = 0; kz < cd.k; ++kz)
                for (i64 ky = 0; ky < cd.k; ++ky)
                    for (i64 kx = 0; kx < cd.k; ++kx) {
                        T acc = T(0);
                        for (i64 od = 0; od < cd.od; ++od) {
                            const i64 iz = od * cd.stride - cd.pad + kz;
                            if (iz < 0 || iz >= cd.d) continue;
                            for (i64 oh = 0; oh < cd.oh; ++oh) {
                                const i64 iy = oh * cd.stride - cd.pad + ky;
                                if (iy < 0 || iy >= cd.h) continue;
                                const T* grow = gch + od * OHW + oh * cd.ow;
                                const T* irow = ich + iz * HW + iy * cd.w;
                                const i64 x0 = kx - cd.pad;
                                i64 lo = 0, hi = cd.ow;
                                if (x0 < 0) lo = (-x0 + cd.stride - 1) / cd.stride;
                                const i64 max_ix = cd.w - 1 - x0;
                                if (max_ix < 0) continue;
                                hi = std::min<i64>(hi, max_ix / cd.stride + 1);
                                for (i64 ow = lo; ow < hi; ++ow)
                                    acc += grow[ow] * irow[ow * cd.stride + x0];
                            }
                        }
                        wch[(kz * cd.k + ky) * cd.k + kx] += acc;
                    }
        }
    }
}

template void conv3d_forward<float>(const float*, const float*, const float*, float*,
                                    const ConvDims&);
template void conv3d_forward<double>(const double*, const double*, const double*, double*,
                                     const ConvDims&);
template void conv3d_backward_input<float>(const float*, const float*, float*, const ConvDims&);
template void conv3d_backward_input<double>(const double*, const double*, double*,
                                            const ConvDims&);
template void conv3d_backward_params<float>(const float*, const float*, float*, float*,
                                            const ConvDims&);
template void conv3d_backward_params<double>(const double*, const double*, double*, double*,
                                             const ConvDims&);

} // namespace llpq::kernels
