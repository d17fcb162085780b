#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "llpq/common.hpp"

namespace llpq {

using Shape3 = std::array<std::size_t, 3>; // (depth, height, width)

inline std::size_t numel(const Shape3& s) { return s[0] * s[1] * s[2]; }

// 3D scalar grid in HU-like intensities.
struct Volume {
    Shape3 shape{0, 0, 0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0}; // mm per voxel
    std::vector<float> data;

    Volume() = default;
    Volume(Shape3 s, float fill = 0.0f) : shape(s), data(numel(s), fill) {}

    float& at(std::size_t z, std::size_t y, std::size_t x) {
        return data[(z * shape[1] + y) * shape[2] + x];
    }
    float at(std::size_t z, std::size_t y, std::size_t x) const {
        return data[(z * shape[1] + y) * shape[2] + x];
    }

    void validate() const;
};

// Binary 3D grid. Region masks must be nonempty (validate_region); lesion
// masks may be empty.
struct Mask3 {
    Shape3 shape{0, 0, 0};
    std::vector<std::uint8_t> data;

    Mask3() = default;
    explicit Mask3(Shape3 s, std::uint8_t fill = 0) : shape(s), data(numel(s), fill) {}

    std::uint8_t& at(std::size_t z, std::size_t y, std::size_t x) {
        return data[(z * shape[1] + y) * shape[2] + x];
    }
    std::uint8_t at(std::size_t z, std::size_t y, std::size_t x) const {
        return data[(z * shape[1] + y) * shape[2] + x];
    }

    std::size_t count() const;
    void validate_binary() const;
};

using RegionMask = Mask3;

void validate_region(const Mask3& region);

enum class Pattern { none, paraseptal, centrilobular };

std::string pattern_name(Pattern p);
Pattern pattern_from_name(const std::string& name);

// One bag: a volume, the region the proportion is defined over, two observer
// grades, and (when synthetic) the planted truth.
struct LabeledSample {
    std::string id;
    Volume volume;
    Mask3 region;
    int grade_rater1 = 0;
    int grade_rater2 = 0;
    std::optional<double> true_proportion;
    std::optional<Mask3> true_lesion;
    Pattern pattern = Pattern::none;

    // Checks shapes, grade ranges and the lesion/proportion consistency
    // contract (|lesion ∩ region| / |region| within 1e-6 of true_proportion).
    void validate(int ncat = 6) const;
};

double lesion_proportion(const Mask3& lesion, const Mask3& region);

} // namespace llpq
