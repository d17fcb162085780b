#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "llpq/nn.hpp"
#include "llpq/tensor.hpp"
#include "llpq/volume.hpp"

namespace llpq {

enum class HeadKind { proportion, gap, mgap };

std::string head_name(HeadKind h);
HeadKind head_from_name(const std::string& name);

struct LayerSpec {
    enum class Kind { conv, residual };
    Kind kind = Kind::conv;
    int channels = 0;
    int kernel = 3; // residual blocks always use kernel 3, same padding
    int stride = 1;
};

struct BackboneConfig {
    std::vector<LayerSpec> layers;

    void validate() const;
    // conv(16,3/1) -> conv(24,3/2) -> res(24) -> conv(32,3/2) -> res(32)
    static BackboneConfig default_config();
};

// Mapping between the input grid and the feature grid produced by the valid
// convolutions: feature voxel j covers input window starting at
// offset + j*stride (window length = stride after centering).
struct GridGeometry {
    std::array<std::int64_t, 3> in_shape{};
    std::array<std::int64_t, 3> out_shape{};
    std::int64_t stride = 1;
    std::int64_t offset = 0;
    std::int64_t receptive = 1; // composed valid-conv kernel extent
    std::int64_t out_channels = 0;
};

// Shape recurrence over the layer list; throws naming the offending layer
// if an extent underflows.
GridGeometry backbone_geometry(const BackboneConfig& cfg, const Shape3& in_shape);

// Crops the region by the geometry offset, average-pools by the total
// stride and thresholds at > 0.5. Throws "region lost by alignment" if the
// result is empty.
Mask3 align_region_to_grid(const Mask3& region, const GridGeometry& g);

// Nearest-feature-center upsampling back to the input grid; border voxels
// outside any feature window take the nearest (clamped) feature value.
Mask3 upsample_mask_to_grid(const Mask3& feature_mask, const GridGeometry& g);
std::vector<float> upsample_map_to_grid(const std::vector<float>& feature_map,
                                        const GridGeometry& g);

struct ModelConfig {
    BackboneConfig backbone;
    HeadKind head = HeadKind::proportion;
    bool sigmoid_output = true; // false = raw-score regression variant (gap head only)
    double input_shift = 800.0; // network input = (intensity + shift) * scale
    double input_scale = 0.01;
    double prob_clamp = 1e-7;

    void validate() const;
};

// The shared backbone plus one of the three heads. Parameters live in a
// ParamStore; forward is const and writes all state into a caller-owned
// Trace, so concurrent inference needs one Trace per thread.
template <typename T>
class Model {
public:
    Model(ModelConfig cfg, std::uint64_t init_seed);

    struct Trace {
        TensorT<T> input;                // normalized [1, d, h, w]
        std::vector<TensorT<T>> acts;    // per-node outputs
        struct NodeCtx {
            TensorT<T> pre;              // conv: pre-relu; residual: conv2 output
            TensorT<T> pre1, h1, sum;    // residual internals
        };
        std::vector<NodeCtx> ctx;
        Mask3 aligned;                   // region on the feature grid
        GridGeometry geom;
        TensorT<T> head_pre;             // prob-map logits or pooled features
        TensorT<T> prob;                 // clamped sigmoid map (proportion head)
        double y_hat_pre = 0.0;          // dense-head scalar before the output sigmoid
        double y_hat = 0.0;
    };

    // `volume` must already be preprocessed (cropped, outside-region filled);
    // intensities are normalized internally.
    double forward(const Volume& volume, const Mask3& region, Trace& tr) const;

    // Accumulates parameter gradients. d_prob_extra (optional) is an
    // additional gradient on the clamped probability map (proportion head).
    void backward(Trace& tr, double d_y_hat, const TensorT<T>* d_prob_extra = nullptr);

    nn::ParamStore<T>& params() { return params_; }
    const nn::ParamStore<T>& params() const { return params_; }
    const ModelConfig& config() const { return cfg_; }
    std::uint64_t init_seed() const { return init_seed_; }

    GridGeometry geometry_for(const Shape3& in_shape) const;

private:
    struct Node {
        LayerSpec spec;
        std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0; // param indices
    };

    TensorT<T> normalize(const Volume& v) const;

    ModelConfig cfg_;
    std::uint64_t init_seed_ = 0;
    nn::ParamStore<T> params_;
    std::vector<Node> nodes_;
    std::size_t head_w_ = 0, head_b_ = 0;
    int feature_channels_ = 0;
};

using ModelF = Model<float>;

} // namespace llpq
