#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "llpq/losses.hpp"
#include "llpq/volume.hpp"

namespace llpq {

// Controls for the synthetic cohort. Ground truth (lesion masks, exact
// proportions) is planted so every evaluation metric has an oracle.
struct CohortSpec {
    int n_samples = 400;
    Shape3 grid_shape{32, 32, 32};
    std::array<double, 6> grade_distribution{0.4, 0.2, 0.15, 0.1, 0.1, 0.05};
    ThresholdVector thresholds = ThresholdVector::scoring_default();
    double lesion_intensity = -970.0;
    double lesion_noise_sigma = 5.0;
    std::array<double, 2> background_intensity_range{-850.0, -750.0};
    int pattern_margin_vox = 3;
    double rater_confusion = 0.1;
    std::uint64_t seed = 7001;
    // Region ellipsoid volume as a fraction of the grid, drawn uniformly.
    std::array<double, 2> region_volume_fraction{0.36, 0.44};

    void validate() const;
};

// One synthetic bag. The region is a centered axis-aligned ellipsoid; the
// lesion is a union of ellipsoidal blobs trimmed to hit the target
// proportion exactly. Paraseptal lesions live within pattern_margin_vox of
// the region boundary, centrilobular blobs are seeded strictly interior.
LabeledSample generate_sample(const CohortSpec& spec, int target_grade, Pattern pattern,
                              std::uint64_t rng_seed);

// True interval grade of the proportion, perturbed to an adjacent grade
// with probability `confusion` (direction uniform, clamped to valid range).
int simulate_rater(double true_proportion, const ThresholdVector& thresholds, double confusion,
                   std::uint64_t rng_seed);

// Largest proportion a pattern can reach in a given region (used to fall
// back to centrilobular when a paraseptal draw cannot fit the grade).
double max_feasible_proportion(const Mask3& region, Pattern pattern, int margin_vox);

struct CohortEntry {
    std::string id;
    int grade_true = 0;
    int grade_rater1 = 0;
    int grade_rater2 = 0;
    double proportion = 0.0;
    Pattern pattern = Pattern::none;
    std::uint64_t sample_seed = 0;
    std::vector<std::pair<std::string, std::string>> checksums; // file -> fnv64
};

struct CohortManifest {
    CohortSpec spec;
    std::vector<CohortEntry> entries;
};

// Draws grades from grade_distribution and patterns uniformly (grades >= 1),
// generates samples in parallel (per-sample derived seeds keep the result
// identical to a serial run) and writes everything under out_dir.
CohortManifest generate_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir);

void write_cohort_manifest(const CohortManifest& m, const std::filesystem::path& file);

} // namespace llpq
