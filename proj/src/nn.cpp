#include "llpq/nn.hpp"

#include <algorithm>
#include <cmath>

namespace llpq::nn {

template <typename T>
std::size_t ParamStore<T>::add(const std::string& name, std::vector<std::size_t> shape) {
    require(index.find(name) == index.end(), "duplicate parameter name: " + name);
    Entry e;
    e.name = name;
    e.value = TensorT<T>(std::move(shape));
    e.value.ensure_grad();
    e.acc_grad_sq.assign(e.value.size(), T(0));
    e.acc_upd_sq.assign(e.value.size(), T(0));
    entries.push_back(std::move(e));
    index[name] = entries.size() - 1;
    return entries.size() - 1;
}

template <typename T>
typename ParamStore<T>::Entry& ParamStore<T>::named(const std::string& name) {
    auto it = index.find(name);
    require(it != index.end(), "unknown parameter: " + name);
    return entries[it->second];
}

template <typename T>
const typename ParamStore<T>::Entry& ParamStore<T>::named(const std::string& name) const {
    auto it = index.find(name);
    require(it != index.end(), "unknown parameter: " + name);
    return entries[it->second];
}

template <typename T>
void ParamStore<T>::zero_grad() {
    for (auto& e : entries) e.value.zero_grad();
}

template <typename T>
std::size_t ParamStore<T>::total_parameters() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.value.size();
    return n;
}

template <typename T>
void adadelta_update(std::vector<T>& value, const std::vector<T>& grad,
                     std::vector<T>& acc_grad_sq, std::vector<T>& acc_upd_sq,
                     const AdadeltaConfig& cfg) {
    require(cfg.rho > 0.0 && cfg.rho < 1.0, "adadelta rho outside (0,1)");
    require(cfg.eps > 0.0, "adadelta eps must be positive");
    require(value.size() == grad.size() && value.size() == acc_grad_sq.size() &&
                value.size() == acc_upd_sq.size(),
            "adadelta state shape mismatch");
    const T rho = static_cast<T>(cfg.rho);
    const T eps = static_cast<T>(cfg.eps);
    for (std::size_t i = 0; i < value.size(); ++i) {
        const T g = grad[i];
        acc_grad_sq[i] = rho * acc_grad_sq[i] + (T(1) - rho) * g * g;
        const T dx = -std::sqrt((acc_upd_sq[i] + eps) / (acc_grad_sq[i] + eps)) * g;
        acc_upd_sq[i] = rho * acc_upd_sq[i] + (T(1) - rho) * dx * dx;
        value[i] += dx;
    }
}

template <typename T>
void adadelta_step(ParamStore<T>& params, const AdadeltaConfig& cfg) {
    for (auto& e : params.entries)
        adadelta_update(e.value.data, e.value.grad, e.acc_grad_sq, e.acc_upd_sq, cfg);
}

template <typename T>
TensorT<T> conv3d(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias,
                  int stride, int pad) {
    require(input.shape.size() == 4, "conv3d input must be [c, d, h, w]");
    require(weight.shape.size() == 5, "conv3d weight must be [c_out, c_in, k, k, k]");
    require(weight.shape[1] == input.shape[0], "conv3d channel mismatch");
    require(weight.shape[2] == weight.shape[3] && weight.shape[3] == weight.shape[4],
            "conv3d kernels are cubic");
    require(bias.shape.size() == 1 && bias.shape[0] == weight.shape[0],
            "conv3d bias shape mismatch");
    const auto cd = kernels::conv_dims(
        static_cast<kernels::i64>(input.shape[0]), static_cast<kernels::i64>(input.shape[1]),
        static_cast<kernels::i64>(input.shape[2]), static_cast<kernels::i64>(input.shape[3]),
        static_cast<kernels::i64>(weight.shape[0]), static_cast<kernels::i64>(weight.shape[2]),
        stride, pad);
    TensorT<T> out({static_cast<std::size_t>(cd.c_out), static_cast<std::size_t>(cd.od),
                    static_cast<std::size_t>(cd.oh), static_cast<std::size_t>(cd.ow)});
    kernels::conv3d_forward(input.data.data(), weight.data.data(), bias.data.data(),
                            out.data.data(), cd);
    return out;
}

template <typename T>
void conv3d_backward(const TensorT<T>& input, const TensorT<T>& weight,
                     const TensorT<T>& grad_out, int stride, int pad, TensorT<T>* grad_input,
                     T* grad_weight, T* grad_bias) {
    const auto cd = kernels::conv_dims(
        static_cast<kernels::i64>(input.shape[0]), static_cast<kernels::i64>(input.shape[1]),
        static_cast<kernels::i64>(input.shape[2]), static_cast<kernels::i64>(input.shape[3]),
        static_cast<kernels::i64>(weight.shape[0]), static_cast<kernels::i64>(weight.shape[2]),
        stride, pad);
    require(grad_out.size() ==
                static_cast<std::size_t>(cd.c_out * cd.od * cd.oh * cd.ow),
            "grad_out shape mismatch");
    if (grad_input) {
        grad_input->resize(input.shape);
        kernels::conv3d_backward_input(weight.data.data(), grad_out.data.data(),
                                       grad_input->data.data(), cd);
    }
    if (grad_weight)
        kernels::conv3d_backward_params(input.data.data(), grad_out.data.data(), grad_weight,
                                        grad_bias, cd);
}

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
    TensorT<T> out(x.shape);
    kernels::relu_forward(x.data.data(), out.data.data(), static_cast<kernels::i64>(x.size()));
    return out;
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
    TensorT<T> out(x.shape);
    kernels::sigmoid_forward(x.data.data(), out.data.data(),
                             static_cast<kernels::i64>(x.size()));
    return out;
}

template <typename T>
TensorT<T> gap(const TensorT<T>& x) {
    require(x.shape.size() == 4, "gap input must be [c, d, h, w]");
    const std::size_t c = x.shape[0];
    const std::size_t n = x.shape[1] * x.shape[2] * x.shape[3];
    TensorT<T> out({c});
    kernels::gap_forward(x.data.data(), out.data.data(), static_cast<kernels::i64>(c),
                         static_cast<kernels::i64>(n));
    return out;
}

template <typename T>
TensorT<T> masked_gap(const TensorT<T>& x, const Mask3& mask) {
    require(x.shape.size() == 4, "masked_gap input must be [c, d, h, w]");
    require(mask.shape[0] == x.shape[1] && mask.shape[1] == x.shape[2] &&
                mask.shape[2] == x.shape[3],
            "mask shape does not match feature grid");
    const std::size_t m = mask.count();
    require(m > 0, "empty mask");
    const std::size_t c = x.shape[0];
    const std::size_t n = x.shape[1] * x.shape[2] * x.shape[3];
    TensorT<T> out({c});
    kernels::masked_gap_forward(x.data.data(), mask.data.data(), static_cast<kernels::i64>(m),
                                out.data.data(), static_cast<kernels::i64>(c),
                                static_cast<kernels::i64>(n));
    return out;
}

template <typename T>
TensorT<T> fully_connected(const TensorT<T>& input, const TensorT<T>& weight,
                           const TensorT<T>& bias) {
    require(weight.shape.size() == 2, "fc weight must be [n_out, n_in]");
    require(input.size() == weight.shape[1], "fc input size mismatch");
    require(bias.shape.size() == 1 && bias.shape[0] == weight.shape[0],
            "fc bias shape mismatch");
    TensorT<T> out({weight.shape[0]});
    kernels::fc_forward(input.data.data(), weight.data.data(), bias.data.data(),
                        out.data.data(), static_cast<kernels::i64>(weight.shape[0]),
                        static_cast<kernels::i64>(weight.shape[1]));
    return out;
}

double grad_check(const std::function<double(const std::vector<double>&)>& f,
                  const std::vector<double>& point, const std::vector<double>& analytic_grad,
                  double eps) {
    require(point.size() == analytic_grad.size(), "gradient size mismatch");
    double max_rel = 0.0;
    std::vector<double> x = point;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + eps;
        const double fp = f(x);
        x[i] = orig - eps;
        const double fm = f(x);
        x[i] = orig;
        const double fd = (fp - fm) / (2.0 * eps);
        const double an = analytic_grad[i];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
        max_rel = std::max(max_rel, std::abs(fd - an) / denom);
    }
    return max_rel;
}

#define LLPQ_INSTANTIATE_NN(T)                                                                \
    template struct ParamStore<T>;                                                            \
    template void adadelta_update<T>(std::vector<T>&, const std::vector<T>&, std::vector<T>&, \
                                     std::vector<T>&, const AdadeltaConfig&);                 \
    template void adadelta_step<T>(ParamStore<T>&, const AdadeltaConfig&);                    \
    template TensorT<T> conv3d<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,    \
                                  int, int);                                                  \
    template void conv3d_backward<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&, \
                                     int, int, TensorT<T>*, T*, T*);                          \
    template TensorT<T> relu<T>(const TensorT<T>&);                                           \
    template TensorT<T> sigmoid<T>(const TensorT<T>&);                                        \
    template TensorT<T> gap<T>(const TensorT<T>&);                                            \
    template TensorT<T> masked_gap<T>(const TensorT<T>&, const Mask3&);                       \
    template TensorT<T> fully_connected<T>(const TensorT<T>&, const TensorT<T>&,              \
                                           const TensorT<T>&);

LLPQ_INSTANTIATE_NN(float)
LLPQ_INSTANTIATE_NN(double)

} // namespace llpq::nn
