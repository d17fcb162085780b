#pragma once

#include <vector>

#include "llpq/volume.hpp"

namespace llpq {

// Exact squared Euclidean distance (in voxels) from every voxel to the
// nearest zero voxel of `mask`. Voxels outside the mask get 0. Grid borders
// are treated as adjacent to the outside, so a mask touching the border
// still has distance 1 there.
std::vector<float> squared_distance_to_outside(const Mask3& mask);

} // namespace llpq
