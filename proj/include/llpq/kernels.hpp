#pragma once

#include <cstdint>

#include "llpq/common.hpp"

namespace llpq::kernels {

using i64 = std::int64_t;

// Geometry of one 3D convolution. Output extent per axis is
// floor((in + 2*pad - k) / stride) + 1.
struct ConvDims {
    i64 c_in = 0, d = 0, h = 0, w = 0;
    i64 c_out = 0, k = 1, stride = 1, pad = 0;
    i64 od = 0, oh = 0, ow = 0;
};

// Fills the output extents; throws if the kernel does not fit.
ConvDims conv_dims(i64 c_in, i64 d, i64 h, i64 w, i64 c_out, i64 k, i64 stride, i64 pad);

// All kernels below are deterministic regardless of thread count: OpenMP
// loops always partition over independent output elements and every
// element's accumulation runs serially in fixed C order.

template <typename T>
void conv3d_forward(const T* in, const T* weight, const T* bias, T* out, const ConvDims& cd);

// grad_in is overwritten.
template <typename T>
void conv3d_backward_input(const T* weight, const T* grad_out, T* grad_in, const ConvDims& cd);

// grad_weight / grad_bias are accumulated into (callers zero them per batch).
template <typename T>
void conv3d_backward_params(const T* in, const T* grad_out, T* grad_weight, T* grad_bias,
                            const ConvDims& cd);

template <typename T> void relu_forward(const T* in, T* out, i64 n);
// grad_in accumulates gout where the saved input was positive.
template <typename T> void relu_backward(const T* in, const T* grad_out, T* grad_in, i64 n);

template <typename T> void sigmoid_forward(const T* in, T* out, i64 n);
// Uses the saved output: d/dx = out * (1 - out).
template <typename T> void sigmoid_backward(const T* out, const T* grad_out, T* grad_in, i64 n);

// Per-channel mean over all spatial positions. in: [c, n_spatial].
template <typename T> void gap_forward(const T* in, T* out, i64 c, i64 n_spatial);
template <typename T> void gap_backward(const T* grad_out, T* grad_in, i64 c, i64 n_spatial);

// Per-channel mean over mask!=0 positions only; m_count = number of them.
template <typename T>
void masked_gap_forward(const T* in, const std::uint8_t* mask, i64 m_count, T* out, i64 c,
                        i64 n_spatial);
template <typename T>
void masked_gap_backward(const T* grad_out, const std::uint8_t* mask, i64 m_count, T* grad_in,
                         i64 c, i64 n_spatial);

// out[o] = bias[o] + sum_i weight[o*n_in + i] * in[i]
template <typename T>
void fc_forward(const T* in, const T* weight, const T* bias, T* out, i64 n_out, i64 n_in);
template <typename T>
void fc_backward(const T* in, const T* weight, const T* grad_out, T* grad_in, T* grad_weight,
                 T* grad_bias, i64 n_out, i64 n_in);

} // namespace llpq::kernels
