#pragma once

#include "llpq/kernels.hpp"

// Naive serial implementations, written as directly as possible from the
// definitions. They exist as the independent oracle for the OpenMP kernels
// and as the baseline in the benchmark; production code never links them.
namespace llpq::kernels::ref {

template <typename T>
void conv3d_forward(const T* in, const T* weight, const T* bias, T* out, const ConvDims& cd);

template <typename T>
void conv3d_backward_input(const T* weight, const T* grad_out, T* grad_in, const ConvDims& cd);

template <typename T>
void conv3d_backward_params(const T* in, const T* grad_out, T* grad_weight, T* grad_bias,
                            const ConvDims& cd);

template <typename T> void gap_forward(const T* in, T* out, i64 c, i64 n_spatial);

template <typename T>
void masked_gap_forward(const T* in, const std::uint8_t* mask, i64 m_count, T* out, i64 c,
                        i64 n_spatial);

} // namespace llpq::kernels::ref
