#include "llpq/volume.hpp"

#include <cmath>

namespace llpq {

void Volume::validate() const {
    require(shape[0] >= 1 && shape[1] >= 1 && shape[2] >= 1, "invalid shape");
    require(data.size() == numel(shape), "volume payload does not match shape");
    for (std::size_t i = 0; i < 3; ++i)
        require(spacing[i] > 0.0, "spacing components must be positive");
    for (float v : data)
        if (!std::isfinite(v)) fail("volume contains non-finite intensity");
}

std::size_t Mask3::count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data) n += (v != 0);
    return n;
}

void Mask3::validate_binary() const {
    require(data.size() == numel(shape), "mask payload does not match shape");
    for (std::uint8_t v : data)
        require(v == 0 || v == 1, "mask values must be 0 or 1");
}

void validate_region(const Mask3& region) {
    region.validate_binary();
    require(region.count() > 0, "empty region");
}

std::string pattern_name(Pattern p) {
    switch (p) {
    case Pattern::none: return "none";
    case Pattern::paraseptal: return "paraseptal";
    case Pattern::centrilobular: return "centrilobular";
    }
    fail("unknown pattern");
}

Pattern pattern_from_name(const std::string& name) {
    if (name == "none" || name.empty()) return Pattern::none;
    if (name == "paraseptal") return Pattern::paraseptal;
    if (name == "centrilobular") return Pattern::centrilobular;
    fail_user("unknown pattern name: " + name);
}

double lesion_proportion(const Mask3& lesion, const Mask3& region) {
    require(lesion.shape == region.shape, "lesion/region shape mismatch");
    std::size_t inter = 0, reg = 0;
    for (std::size_t i = 0; i < region.data.size(); ++i) {
        reg += (region.data[i] != 0);
        inter += (region.data[i] != 0 && lesion.data[i] != 0);
    }
    require(reg > 0, "empty region");
    return static_cast<double>(inter) / static_cast<double>(reg);
}

void LabeledSample::validate(int ncat) const {
    volume.validate();
    validate_region(region);
    require(region.shape == volume.shape, "region shape does not match volume");
    require(grade_rater1 >= 0 && grade_rater1 < ncat, "grade out of range");
    require(grade_rater2 >= 0 && grade_rater2 < ncat, "grade out of range");
    if (true_lesion) {
        true_lesion->validate_binary();
        require(true_lesion->shape == volume.shape, "lesion shape does not match volume");
        require(true_proportion.has_value(),
                "true_lesion present but true_proportion absent");
        const double p = lesion_proportion(*true_lesion, region);
        require(std::abs(p - *true_proportion) <= 1e-6,
                "true_proportion inconsistent with lesion mask");
    }
    if (true_proportion)
        require(*true_proportion >= 0.0 && *true_proportion <= 1.0,
                "true_proportion outside [0,1]");
}

} // namespace llpq
