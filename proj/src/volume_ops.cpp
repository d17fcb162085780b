#include "llpq/volume_ops.hpp"

#include <algorithm>

#include "llpq/rng.hpp"

namespace llpq {

CropBox region_bounding_box(const Mask3& region, int margin) {
    require(margin >= 0, "margin must be nonnegative");
    const auto& s = region.shape;
    Shape3 lo{s[0], s[1], s[2]};
    Shape3 hi{0, 0, 0};
    bool any = false;
    for (std::size_t z = 0; z < s[0]; ++z)
        for (std::size_t y = 0; y < s[1]; ++y)
            for (std::size_t x = 0; x < s[2]; ++x)
                if (region.at(z, y, x)) {
                    any = true;
                    lo[0] = std::min(lo[0], z);
                    lo[1] = std::min(lo[1], y);
                    lo[2] = std::min(lo[2], x);
                    hi[0] = std::max(hi[0], z + 1);
                    hi[1] = std::max(hi[1], y + 1);
                    hi[2] = std::max(hi[2], x + 1);
                }
    if (!any) fail("empty region");
    const std::size_t m = static_cast<std::size_t>(margin);
    CropBox box;
    for (int a = 0; a < 3; ++a) {
        box.lo[a] = lo[a] >= m ? lo[a] - m : 0;
        box.hi[a] = std::min(hi[a] + m, s[a]);
    }
    return box;
}

namespace {

Shape3 box_shape(const CropBox& b) {
    return {b.hi[0] - b.lo[0], b.hi[1] - b.lo[1], b.hi[2] - b.lo[2]};
}

Mask3 crop_mask(const Mask3& m, const CropBox& b) {
    Mask3 out(box_shape(b));
    for (std::size_t z = 0; z < out.shape[0]; ++z)
        for (std::size_t y = 0; y < out.shape[1]; ++y)
            for (std::size_t x = 0; x < out.shape[2]; ++x)
                out.at(z, y, x) = m.at(b.lo[0] + z, b.lo[1] + y, b.lo[2] + x);
    return out;
}

} // namespace

Volume preprocess_region(const Volume& volume, const Mask3& region,
                         float fill_value, int margin) {
    require(region.shape == volume.shape, "region shape does not match volume");
    const CropBox box = region_bounding_box(region, margin);
    Volume out(box_shape(box));
    out.spacing = volume.spacing;
    for (std::size_t z = 0; z < out.shape[0]; ++z)
        for (std::size_t y = 0; y < out.shape[1]; ++y)
            for (std::size_t x = 0; x < out.shape[2]; ++x) {
                const std::size_t vz = box.lo[0] + z, vy = box.lo[1] + y, vx = box.lo[2] + x;
                out.at(z, y, x) = region.at(vz, vy, vx) ? volume.at(vz, vy, vx) : fill_value;
            }
    return out;
}

LabeledSample preprocess_sample(const LabeledSample& sample, float fill_value, int margin) {
    const CropBox box = region_bounding_box(sample.region, margin);
    LabeledSample out = sample;
    out.volume = preprocess_region(sample.volume, sample.region, fill_value, margin);
    out.region = crop_mask(sample.region, box);
    if (sample.true_lesion) out.true_lesion = crop_mask(*sample.true_lesion, box);
    return out;
}

namespace {

// dy/dx are applied as out(z, y, x) = in(z, y - dy, x - dx).
template <typename Grid, typename V>
Grid shift_flip_2d(const Grid& in, bool flip_x, int dy, int dx, V fill) {
    Grid out = in;
    const std::size_t D = in.shape[0], H = in.shape[1], W = in.shape[2];
    for (std::size_t z = 0; z < D; ++z)
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
                const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) - dy;
                std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x) - dx;
                if (flip_x && sx >= 0 && sx < static_cast<std::ptrdiff_t>(W))
                    sx = static_cast<std::ptrdiff_t>(W) - 1 - sx;
                if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(H) || sx < 0 ||
                    sx >= static_cast<std::ptrdiff_t>(W)) {
                    out.at(z, y, x) = fill;
                } else {
                    out.at(z, y, x) = in.at(z, static_cast<std::size_t>(sy),
                                            static_cast<std::size_t>(sx));
                }
            }
    return out;
}

} // namespace

LabeledSample augment(const LabeledSample& sample, std::uint64_t rng_seed,
                      int max_shift_vox, float fill_value) {
    require(max_shift_vox >= 0, "max_shift_vox must be nonnegative");
    Rng rng(rng_seed);
    const bool flip = rng.bernoulli(0.5);
    int dy = static_cast<int>(rng.uniform_int(-max_shift_vox, max_shift_vox));
    int dx = static_cast<int>(rng.uniform_int(-max_shift_vox, max_shift_vox));

    // Clamp the draw so no region voxel is shifted off the grid; this keeps
    // the in-region intensity multiset and thus the proportion exact.
    const CropBox box = region_bounding_box(sample.region, 0);
    const auto& s = sample.region.shape;
    const int dy_lo = -static_cast<int>(box.lo[1]);
    const int dy_hi = static_cast<int>(s[1] - box.hi[1]);
    dy = std::clamp(dy, dy_lo, dy_hi);
    int lo_x = static_cast<int>(box.lo[2]);
    int hi_gap = static_cast<int>(s[2] - box.hi[2]);
    if (flip) std::swap(lo_x, hi_gap); // the flip happens before the shift
    dx = std::clamp(dx, -lo_x, hi_gap);

    LabeledSample out = sample;
    out.volume.data = shift_flip_2d(sample.volume, flip, dy, dx, fill_value).data;
    out.region = shift_flip_2d(sample.region, flip, dy, dx, std::uint8_t(0));
    if (sample.true_lesion)
        out.true_lesion = shift_flip_2d(*sample.true_lesion, flip, dy, dx, std::uint8_t(0));
    return out;
}

} // namespace llpq
