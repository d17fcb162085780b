#pragma once

#include <array>
#include <cstdint>

#include "llpq/volume.hpp"

namespace llpq {

// Half-open voxel box [lo, hi).
struct CropBox {
    Shape3 lo{0, 0, 0};
    Shape3 hi{0, 0, 0};
};

// Tight bounding box of the set voxels, expanded by `margin` and clamped to
// the grid. Throws "empty region" for an all-zero mask.
CropBox region_bounding_box(const Mask3& region, int margin = 0);

// Crops to the region's bounding box (plus margin) and overwrites every
// voxel outside the mask with fill_value.
Volume preprocess_region(const Volume& volume, const Mask3& region,
                         float fill_value = -800.0f, int margin = 0);

// Same crop applied to volume, region and lesion together; labels unchanged.
LabeledSample preprocess_sample(const LabeledSample& sample,
                                float fill_value = -800.0f, int margin = 0);

// Axial-plane augmentation: width-axis flip with probability 1/2 and an
// integer (dy, dx) translation drawn uniformly from [-max_shift_vox,
// max_shift_vox]^2, then clamped so the region mask never leaves the grid.
// Volume, region and lesion are transformed identically; vacated volume
// voxels read fill_value. Deterministic given rng_seed.
LabeledSample augment(const LabeledSample& sample, std::uint64_t rng_seed,
                      int max_shift_vox, float fill_value = -800.0f);

} // namespace llpq
