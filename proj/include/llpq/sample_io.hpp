#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "llpq/volume.hpp"

namespace llpq {

// On-disk layout per sample directory:
//   volume.raw   raw little-endian float32, C order
//   region.raw   raw little-endian float32 holding 0.0/1.0
//   lesion.raw   optional, same encoding as region.raw
//   meta.json    shapes, spacing, dtype tags, roles, labels
// Cohort root additionally holds labels.csv and manifest.json.

void save_sample(const LabeledSample& sample, const std::filesystem::path& dir);
LabeledSample load_sample(const std::filesystem::path& dir);

struct LabelRow {
    std::string id;
    int grade_rater1 = 0;
    int grade_rater2 = 0;
    double true_proportion = 0.0;
    std::string pattern;
};

void write_labels_csv(const std::vector<LabelRow>& rows, const std::filesystem::path& file);
std::vector<LabelRow> read_labels_csv(const std::filesystem::path& file);

// Loads every sample listed in <root>/labels.csv, in CSV order.
std::vector<LabeledSample> load_cohort(const std::filesystem::path& root);
std::vector<std::string> cohort_ids(const std::filesystem::path& root);

// FNV-1a 64-bit over the file bytes, as a 16-digit hex string.
std::string file_checksum(const std::filesystem::path& file);

// Shortest-round-trip decimal rendering for doubles, used everywhere a
// float lands in JSON/CSV so that re-reading is exact.
std::string format_double(double v);

} // namespace llpq
