#include "llpq/model.hpp"

#include <algorithm>
#include <cmath>

#include "llpq/rng.hpp"

namespace llpq {

std::string head_name(HeadKind h) {
    switch (h) {
    case HeadKind::proportion: return "proportion";
    case HeadKind::gap: return "gap";
    case HeadKind::mgap: return "mgap";
    }
    fail("unknown head");
}

HeadKind head_from_name(const std::string& name) {
    if (name == "proportion") return HeadKind::proportion;
    if (name == "gap") return HeadKind::gap;
    if (name == "mgap") return HeadKind::mgap;
    fail_user("unknown head name: " + name);
}

void BackboneConfig::validate() const {
    require(!layers.empty(), "backbone needs at least one layer");
    int ch = 1;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        require(l.channels >= 1, "layer " + std::to_string(i) + ": channels must be >= 1");
        require(l.kernel >= 1, "layer " + std::to_string(i) + ": kernel must be >= 1");
        require(l.stride >= 1, "layer " + std::to_string(i) + ": stride must be >= 1");
        if (l.kind == LayerSpec::Kind::residual) {
            require(l.channels == ch, "layer " + std::to_string(i) +
                                          ": residual channel mismatch (input " +
                                          std::to_string(ch) + ", block " +
                                          std::to_string(l.channels) + ")");
            require(l.stride == 1, "layer " + std::to_string(i) + ": residual stride must be 1");
            require(l.kernel % 2 == 1,
                    "layer " + std::to_string(i) + ": residual kernel must be odd");
        }
        ch = l.channels;
    }
}

BackboneConfig BackboneConfig::default_config() {
    BackboneConfig cfg;
    cfg.layers = {
        {LayerSpec::Kind::conv, 16, 3, 1},     {LayerSpec::Kind::conv, 24, 3, 2},
        {LayerSpec::Kind::residual, 24, 3, 1}, {LayerSpec::Kind::conv, 32, 3, 2},
        {LayerSpec::Kind::residual, 32, 3, 1},
    };
    return cfg;
}

GridGeometry backbone_geometry(const BackboneConfig& cfg, const Shape3& in_shape) {
    cfg.validate();
    GridGeometry g;
    for (int a = 0; a < 3; ++a) {
        g.in_shape[a] = static_cast<std::int64_t>(in_shape[a]);
        g.out_shape[a] = g.in_shape[a];
    }
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const auto& l = cfg.layers[i];
        if (l.kind == LayerSpec::Kind::residual) continue; // same padding, shape preserved
        for (int a = 0; a < 3; ++a) {
            const std::int64_t ext = g.out_shape[a];
            if (ext < l.kernel)
                fail("layer " + std::to_string(i) + " (conv k=" + std::to_string(l.kernel) +
                     "/" + std::to_string(l.stride) + "): input extent " + std::to_string(ext) +
                     " smaller than kernel");
            g.out_shape[a] = (ext - l.kernel) / l.stride + 1;
        }
        g.receptive += static_cast<std::int64_t>(l.kernel - 1) * g.stride;
        g.stride *= l.stride;
    }
    g.offset = (g.receptive - 1) / 2;
    g.out_channels = cfg.layers.back().channels;
    return g;
}

Mask3 align_region_to_grid(const Mask3& region, const GridGeometry& g) {
    for (int a = 0; a < 3; ++a)
        require(static_cast<std::int64_t>(region.shape[a]) == g.in_shape[a],
                "region shape does not match geometry");
    Mask3 out({static_cast<std::size_t>(g.out_shape[0]), static_cast<std::size_t>(g.out_shape[1]),
               static_cast<std::size_t>(g.out_shape[2])});
    const std::int64_t S = g.stride;
    const double window = static_cast<double>(S * S * S);
    for (std::int64_t z = 0; z < g.out_shape[0]; ++z)
        for (std::int64_t y = 0; y < g.out_shape[1]; ++y)
            for (std::int64_t x = 0; x < g.out_shape[2]; ++x) {
                std::int64_t ones = 0;
                for (std::int64_t dz = 0; dz < S; ++dz)
                    for (std::int64_t dy = 0; dy < S; ++dy)
                        for (std::int64_t dx = 0; dx < S; ++dx)
                            ones += region.at(static_cast<std::size_t>(g.offset + z * S + dz),
                                              static_cast<std::size_t>(g.offset + y * S + dy),
                                              static_cast<std::size_t>(g.offset + x * S + dx));
                out.at(static_cast<std::size_t>(z), static_cast<std::size_t>(y),
                       static_cast<std::size_t>(x)) =
                    (static_cast<double>(ones) / window > 0.5) ? 1 : 0;
            }
    if (out.count() == 0) fail("region lost by alignment");
    return out;
}

namespace {

inline std::int64_t nearest_feature_index(std::int64_t v, const GridGeometry& g, int axis) {
    const double center_shift = static_cast<double>(g.stride - 1) / 2.0;
    const double jf = (static_cast<double>(v - g.offset) - center_shift) /
                      static_cast<double>(g.stride);
    std::int64_t j = std::llround(jf);
    return std::clamp<std::int64_t>(j, 0, g.out_shape[axis] - 1);
}

} // namespace

Mask3 upsample_mask_to_grid(const Mask3& feature_mask, const GridGeometry& g) {
    Mask3 out({static_cast<std::size_t>(g.in_shape[0]), static_cast<std::size_t>(g.in_shape[1]),
               static_cast<std::size_t>(g.in_shape[2])});
    for (std::int64_t z = 0; z < g.in_shape[0]; ++z) {
        const std::size_t jz = static_cast<std::size_t>(nearest_feature_index(z, g, 0));
        for (std::int64_t y = 0; y < g.in_shape[1]; ++y) {
            const std::size_t jy = static_cast<std::size_t>(nearest_feature_index(y, g, 1));
            for (std::int64_t x = 0; x < g.in_shape[2]; ++x) {
                const std::size_t jx = static_cast<std::size_t>(nearest_feature_index(x, g, 2));
                out.at(static_cast<std::size_t>(z), static_cast<std::size_t>(y),
                       static_cast<std::size_t>(x)) = feature_mask.at(jz, jy, jx);
            }
        }
    }
    return out;
}

std::vector<float> upsample_map_to_grid(const std::vector<float>& feature_map,
                                        const GridGeometry& g) {
    require(feature_map.size() == static_cast<std::size_t>(g.out_shape[0] * g.out_shape[1] *
                                                           g.out_shape[2]),
            "feature map size does not match geometry");
    std::vector<float> out(static_cast<std::size_t>(g.in_shape[0] * g.in_shape[1] *
                                                    g.in_shape[2]));
    std::size_t i = 0;
    for (std::int64_t z = 0; z < g.in_shape[0]; ++z) {
        const std::int64_t jz = nearest_feature_index(z, g, 0);
        for (std::int64_t y = 0; y < g.in_shape[1]; ++y) {
            const std::int64_t jy = nearest_feature_index(y, g, 1);
            for (std::int64_t x = 0; x < g.in_shape[2]; ++x) {
                const std::int64_t jx = nearest_feature_index(x, g, 2);
                out[i++] = feature_map[static_cast<std::size_t>(
                    (jz * g.out_shape[1] + jy) * g.out_shape[2] + jx)];
            }
        }
    }
    return out;
}

void ModelConfig::validate() const {
    backbone.validate();
    require(input_scale > 0.0, "input_scale must be positive");
    require(prob_clamp > 0.0 && prob_clamp < 0.5, "prob_clamp outside (0, 0.5)");
    if (!sigmoid_output)
        require_user(head == HeadKind::gap,
                     "raw-score output is only supported for the gap head");
}

template <typename T>
Model<T>::Model(ModelConfig cfg, std::uint64_t init_seed)
    : cfg_(std::move(cfg)), init_seed_(init_seed) {
    cfg_.validate();
    Rng rng(derive_seed(init_seed_, rng_purpose::init));

    const auto he_init = [&](TensorT<T>& w, std::size_t fan_in) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (auto& v : w.data) v = static_cast<T>(rng.uniform(-bound, bound));
    };

    int ch = 1;
    for (std::size_t i = 0; i < cfg_.backbone.layers.size(); ++i) {
        const auto& l = cfg_.backbone.layers[i];
        Node node;
        node.spec = l;
        const std::string base = "backbone." + std::to_string(i);
        const std::size_t k = static_cast<std::size_t>(l.kernel);
        if (l.kind == LayerSpec::Kind::conv) {
            node.w1 = params_.add(base + ".conv.w",
                                  {static_cast<std::size_t>(l.channels),
                                   static_cast<std::size_t>(ch), k, k, k});
            node.b1 = params_.add(base + ".conv.b", {static_cast<std::size_t>(l.channels)});
            he_init(params_.at(node.w1).value, static_cast<std::size_t>(ch) * k * k * k);
        } else {
            const std::size_t c = static_cast<std::size_t>(l.channels);
            node.w1 = params_.add(base + ".res.c1.w", {c, c, k, k, k});
            node.b1 = params_.add(base + ".res.c1.b", {c});
            node.w2 = params_.add(base + ".res.c2.w", {c, c, k, k, k});
            node.b2 = params_.add(base + ".res.c2.b", {c});
            he_init(params_.at(node.w1).value, c * k * k * k);
            he_init(params_.at(node.w2).value, c * k * k * k);
        }
        ch = l.channels;
        nodes_.push_back(node);
    }
    feature_channels_ = ch;

    const std::size_t fc = static_cast<std::size_t>(feature_channels_);
    if (cfg_.head == HeadKind::proportion) {
        head_w_ = params_.add("head.conv.w", {1, fc, 1, 1, 1});
        head_b_ = params_.add("head.conv.b", {1});
    } else {
        head_w_ = params_.add("head.fc.w", {1, fc});
        head_b_ = params_.add("head.fc.b", {1});
    }
    he_init(params_.at(head_w_).value, fc);
}

template <typename T>
GridGeometry Model<T>::geometry_for(const Shape3& in_shape) const {
    return backbone_geometry(cfg_.backbone, in_shape);
}

template <typename T>
TensorT<T> Model<T>::normalize(const Volume& v) const {
    TensorT<T> x({1, v.shape[0], v.shape[1], v.shape[2]});
    const double shift = cfg_.input_shift, scale = cfg_.input_scale;
    for (std::size_t i = 0; i < v.data.size(); ++i)
        x.data[i] = static_cast<T>((static_cast<double>(v.data[i]) + shift) * scale);
    return x;
}

template <typename T>
double Model<T>::forward(const Volume& volume, const Mask3& region, Trace& tr) const {
    require(region.shape == volume.shape, "region shape does not match volume");
    tr.geom = geometry_for(volume.shape);
    tr.input = normalize(volume);
    tr.acts.resize(nodes_.size());
    tr.ctx.assign(nodes_.size(), {});

    const TensorT<T>* cur = &tr.input;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& node = nodes_[i];
        auto& ctx = tr.ctx[i];
        const auto& w1 = params_.at(node.w1).value;
        const auto& b1 = params_.at(node.b1).value;
        if (node.spec.kind == LayerSpec::Kind::conv) {
            ctx.pre = nn::conv3d(*cur, w1, b1, node.spec.stride, 0);
            tr.acts[i] = nn::relu(ctx.pre);
        } else {
            const int pad = node.spec.kernel / 2;
            ctx.pre1 = nn::conv3d(*cur, w1, b1, 1, pad);
            ctx.h1 = nn::relu(ctx.pre1);
            ctx.pre = nn::conv3d(ctx.h1, params_.at(node.w2).value, params_.at(node.b2).value,
                                 1, pad);
            ctx.sum = ctx.pre;
            for (std::size_t j = 0; j < ctx.sum.size(); ++j) ctx.sum.data[j] += cur->data[j];
            tr.acts[i] = nn::relu(ctx.sum);
        }
        cur = &tr.acts[i];
    }
    const TensorT<T>& feats = *cur;

    if (cfg_.head == HeadKind::proportion || cfg_.head == HeadKind::mgap)
        tr.aligned = align_region_to_grid(region, tr.geom);

    const auto& hw = params_.at(head_w_).value;
    const auto& hb = params_.at(head_b_).value;
    if (cfg_.head == HeadKind::proportion) {
        tr.head_pre = nn::conv3d(feats, hw, hb, 1, 0);
        tr.prob = nn::sigmoid(tr.head_pre);
        const T lo = static_cast<T>(cfg_.prob_clamp);
        const T hi = static_cast<T>(1.0 - cfg_.prob_clamp);
        for (auto& p : tr.prob.data) p = std::clamp(p, lo, hi);
        // masked mean in double so exported maps reproduce y_hat exactly
        double acc = 0.0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < tr.prob.size(); ++i)
            if (tr.aligned.data[i]) {
                acc += static_cast<double>(tr.prob.data[i]);
                ++m;
            }
        tr.y_hat = acc / static_cast<double>(m);
        tr.y_hat_pre = tr.y_hat;
    } else {
        tr.head_pre = (cfg_.head == HeadKind::gap) ? nn::gap(feats)
                                                   : nn::masked_gap(feats, tr.aligned);
        const TensorT<T> y = nn::fully_connected(tr.head_pre, hw, hb);
        tr.y_hat_pre = static_cast<double>(y.data[0]);
        tr.y_hat = cfg_.sigmoid_output ? 1.0 / (1.0 + std::exp(-tr.y_hat_pre)) : tr.y_hat_pre;
    }
    return tr.y_hat;
}

template <typename T>
void Model<T>::backward(Trace& tr, double d_y_hat, const TensorT<T>* d_prob_extra) {
    const TensorT<T>& feats = tr.acts.back();
    TensorT<T> d_feats;

    const auto grad_of = [&](std::size_t idx) { return params_.at(idx).value.grad.data(); };
    const auto& hw = params_.at(head_w_).value;

    if (cfg_.head == HeadKind::proportion) {
        const std::size_t m = tr.aligned.count();
        TensorT<T> d_prob(tr.prob.shape);
        const T per = static_cast<T>(d_y_hat / static_cast<double>(m));
        for (std::size_t i = 0; i < d_prob.size(); ++i) {
            T g = tr.aligned.data[i] ? per : T(0);
            if (d_prob_extra) g += d_prob_extra->data[i];
            d_prob.data[i] = g;
        }
        // through the clamp (zero when saturated), then the sigmoid
        const T lo = static_cast<T>(cfg_.prob_clamp);
        const T hi = static_cast<T>(1.0 - cfg_.prob_clamp);
        TensorT<T> d_pre(tr.head_pre.shape);
        for (std::size_t i = 0; i < d_pre.size(); ++i) {
            const T p = tr.prob.data[i];
            d_pre.data[i] = (p > lo && p < hi) ? d_prob.data[i] * p * (T(1) - p) : T(0);
        }
        nn::conv3d_backward(feats, hw, d_pre, 1, 0, &d_feats, grad_of(head_w_),
                            grad_of(head_b_));
    } else {
        double d_pre_scalar = d_y_hat;
        if (cfg_.sigmoid_output) d_pre_scalar *= tr.y_hat * (1.0 - tr.y_hat);
        TensorT<T> d_out({1});
        d_out.data[0] = static_cast<T>(d_pre_scalar);
        TensorT<T> d_pooled({tr.head_pre.shape[0]});
        kernels::fc_backward(tr.head_pre.data.data(), hw.data.data(), d_out.data.data(),
                             d_pooled.data.data(), grad_of(head_w_), grad_of(head_b_), 1,
                             static_cast<kernels::i64>(tr.head_pre.size()));
        d_feats.resize(feats.shape);
        const auto c = static_cast<kernels::i64>(feats.shape[0]);
        const auto n =
            static_cast<kernels::i64>(feats.shape[1] * feats.shape[2] * feats.shape[3]);
        if (cfg_.head == HeadKind::gap)
            kernels::gap_backward(d_pooled.data.data(), d_feats.data.data(), c, n);
        else
            kernels::masked_gap_backward(d_pooled.data.data(), tr.aligned.data.data(),
                                         static_cast<kernels::i64>(tr.aligned.count()),
                                         d_feats.data.data(), c, n);
    }

    // walk the backbone in reverse
    TensorT<T> d_cur = std::move(d_feats);
    for (std::size_t ii = nodes_.size(); ii-- > 0;) {
        const auto& node = nodes_[ii];
        auto& ctx = tr.ctx[ii];
        const TensorT<T>& x = (ii == 0) ? tr.input : tr.acts[ii - 1];
        TensorT<T> d_x;
        if (node.spec.kind == LayerSpec::Kind::conv) {
            TensorT<T> d_pre(ctx.pre.shape);
            kernels::relu_backward(ctx.pre.data.data(), d_cur.data.data(), d_pre.data.data(),
                                   static_cast<kernels::i64>(d_pre.size()));
            nn::conv3d_backward(x, params_.at(node.w1).value, d_pre, node.spec.stride, 0, &d_x,
                                grad_of(node.w1), grad_of(node.b1));
        } else {
            const int pad = node.spec.kernel / 2;
            TensorT<T> d_sum(ctx.sum.shape);
            kernels::relu_backward(ctx.sum.data.data(), d_cur.data.data(), d_sum.data.data(),
                                   static_cast<kernels::i64>(d_sum.size()));
            TensorT<T> d_h1;
            nn::conv3d_backward(ctx.h1, params_.at(node.w2).value, d_sum, 1, pad, &d_h1,
                                grad_of(node.w2), grad_of(node.b2));
            TensorT<T> d_pre1(ctx.pre1.shape);
            kernels::relu_backward(ctx.pre1.data.data(), d_h1.data.data(), d_pre1.data.data(),
                                   static_cast<kernels::i64>(d_pre1.size()));
            nn::conv3d_backward(x, params_.at(node.w1).value, d_pre1, 1, pad, &d_x,
                                grad_of(node.w1), grad_of(node.b1));
            for (std::size_t j = 0; j < d_x.size(); ++j) d_x.data[j] += d_sum.data[j];
        }
        d_cur = std::move(d_x);
    }
}

template class Model<float>;
template class Model<double>;

} // namespace llpq
