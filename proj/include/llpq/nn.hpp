#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "llpq/kernels.hpp"
#include "llpq/tensor.hpp"
#include "llpq/volume.hpp"

namespace llpq::nn {

// Named parameters plus their Adadelta state, in insertion order.
template <typename T>
struct ParamStore {
    struct Entry {
        std::string name;
        TensorT<T> value;           // value.grad holds the gradient
        std::vector<T> acc_grad_sq; // E[g^2]
        std::vector<T> acc_upd_sq;  // E[dx^2]
    };

    std::vector<Entry> entries;
    std::map<std::string, std::size_t> index;

    std::size_t add(const std::string& name, std::vector<std::size_t> shape);
    Entry& at(std::size_t i) { return entries[i]; }
    const Entry& at(std::size_t i) const { return entries[i]; }
    Entry& named(const std::string& name);
    const Entry& named(const std::string& name) const;
    void zero_grad();
    std::size_t total_parameters() const;
};

struct AdadeltaConfig {
    double rho = 0.95;
    double eps = 1e-6;
};

// One Adadelta update on a single tensor:
//   Eg = rho Eg + (1-rho) g^2
//   dx = -sqrt((Edx + eps) / (Eg + eps)) * g
//   Edx = rho Edx + (1-rho) dx^2
//   x += dx
template <typename T>
void adadelta_update(std::vector<T>& value, const std::vector<T>& grad,
                     std::vector<T>& acc_grad_sq, std::vector<T>& acc_upd_sq,
                     const AdadeltaConfig& cfg);

template <typename T>
void adadelta_step(ParamStore<T>& params, const AdadeltaConfig& cfg);

// --- Tensor-level ops (thin shape-checked wrappers over the kernels) ---

// input [c_in, d, h, w], weight [c_out, c_in, k, k, k], bias [c_out].
// pad = 0 gives a valid convolution.
template <typename T>
TensorT<T> conv3d(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias,
                  int stride, int pad = 0);

// grad_input is resized and overwritten; grad_weight / grad_bias point at
// buffers of weight.size() / bias.size() elements and are accumulated into.
template <typename T>
void conv3d_backward(const TensorT<T>& input, const TensorT<T>& weight,
                     const TensorT<T>& grad_out, int stride, int pad, TensorT<T>* grad_input,
                     T* grad_weight, T* grad_bias);

template <typename T> TensorT<T> relu(const TensorT<T>& x);
template <typename T> TensorT<T> sigmoid(const TensorT<T>& x);

// Per-channel spatial mean of a [c, d, h, w] tensor -> [c].
template <typename T> TensorT<T> gap(const TensorT<T>& x);
// Mean restricted to mask==1 positions; mask shape must match the spatial dims.
template <typename T> TensorT<T> masked_gap(const TensorT<T>& x, const Mask3& mask);

// weight [n_out, n_in], bias [n_out], input [n_in] -> [n_out].
template <typename T>
TensorT<T> fully_connected(const TensorT<T>& input, const TensorT<T>& weight,
                           const TensorT<T>& bias);

// Central finite differences against an analytic gradient; returns the
// maximum relative error. f must be evaluable at perturbed points.
double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& point, const std::vector<double>& analytic_grad,
                  double eps = 1e-3);

} // namespace llpq::nn
