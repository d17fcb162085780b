#include "llpq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "llpq/edt.hpp"
#include "llpq/rng.hpp"
#include "llpq/sample_io.hpp"

namespace llpq {

namespace fs = std::filesystem;

void CohortSpec::validate() const {
    require_user(n_samples >= 1, "n_samples must be >= 1");
    for (auto s : grid_shape)
        require_user(s >= 16, "grid_shape extents must be >= 16");
    double sum = 0.0;
    for (double p : grade_distribution) {
        require_user(p >= 0.0, "grade_distribution entries must be nonnegative");
        sum += p;
    }
    require_user(std::abs(sum - 1.0) <= 1e-9, "grade_distribution must sum to 1");
    thresholds.validate();
    require_user(thresholds.ncat() == 6, "cohort thresholds must define 6 grades");
    require_user(lesion_intensity < -950.0,
                 "lesion_intensity must stay below -950 so densitometry remains valid");
    require_user(lesion_noise_sigma >= 0.0, "lesion_noise_sigma must be nonnegative");
    require_user(background_intensity_range[0] < background_intensity_range[1],
                 "background_intensity_range must be increasing");
    require_user(background_intensity_range[0] > -950.0,
                 "background intensities must stay above -950");
    require_user(pattern_margin_vox >= 1, "pattern_margin_vox must be >= 1");
    const std::size_t min_dim = std::min({grid_shape[0], grid_shape[1], grid_shape[2]});
    require_user(static_cast<std::size_t>(pattern_margin_vox) * 4 <= min_dim,
                 "pattern_margin_vox too large for the grid");
    require_user(rater_confusion >= 0.0 && rater_confusion < 1.0,
                 "rater_confusion outside [0,1)");
    require_user(region_volume_fraction[0] > 0.05 &&
                     region_volume_fraction[1] < 0.53 &&
                     region_volume_fraction[0] <= region_volume_fraction[1],
                 "region_volume_fraction outside the geometrically feasible range");
}

namespace {

Mask3 make_region(const CohortSpec& spec, Rng& rng) {
    const auto& gs = spec.grid_shape;
    const double f = rng.uniform(spec.region_volume_fraction[0], spec.region_volume_fraction[1]);
    const double target = f * static_cast<double>(numel(gs)) * 3.0 / (4.0 * 3.14159265358979323846);
    const double r_mean = std::cbrt(target);

    std::array<double, 3> jit{};
    double log_sum = 0.0;
    for (auto& j : jit) {
        j = rng.uniform(-0.08, 0.08);
        log_sum += j;
    }
    std::array<double, 3> semi{};
    for (int a = 0; a < 3; ++a) {
        semi[a] = r_mean * std::exp(jit[a] - log_sum / 3.0);
        // keep the ellipsoid strictly inside the grid
        semi[a] = std::clamp(semi[a], 4.0, static_cast<double>(gs[a]) / 2.0 - 1.0);
    }

    Mask3 region(gs);
    const std::array<double, 3> c{(gs[0] - 1) / 2.0, (gs[1] - 1) / 2.0, (gs[2] - 1) / 2.0};
    for (std::size_t z = 0; z < gs[0]; ++z)
        for (std::size_t y = 0; y < gs[1]; ++y)
            for (std::size_t x = 0; x < gs[2]; ++x) {
                const double dz = (z - c[0]) / semi[0];
                const double dy = (y - c[1]) / semi[1];
                const double dx = (x - c[2]) / semi[2];
                region.at(z, y, x) = (dz * dz + dy * dy + dx * dx <= 1.0) ? 1 : 0;
            }
    return region;
}

struct Voxel {
    int z, y, x;
};

// Grows `lesion` by one ellipsoidal blob intersected with `allowed`;
// returns the freshly added voxels.
std::vector<Voxel> add_blob(Mask3& lesion, const Mask3& allowed, Voxel center,
                            std::array<double, 3> radii) {
    std::vector<Voxel> added;
    const auto& s = lesion.shape;
    const int z0 = std::max(0, center.z - static_cast<int>(radii[0]));
    const int z1 = std::min(static_cast<int>(s[0]) - 1, center.z + static_cast<int>(radii[0]));
    const int y0 = std::max(0, center.y - static_cast<int>(radii[1]));
    const int y1 = std::min(static_cast<int>(s[1]) - 1, center.y + static_cast<int>(radii[1]));
    const int x0 = std::max(0, center.x - static_cast<int>(radii[2]));
    const int x1 = std::min(static_cast<int>(s[2]) - 1, center.x + static_cast<int>(radii[2]));
    for (int z = z0; z <= z1; ++z)
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double dz = (z - center.z) / radii[0];
                const double dy = (y - center.y) / radii[1];
                const double dx = (x - center.x) / radii[2];
                if (dz * dz + dy * dy + dx * dx > 1.0) continue;
                const std::size_t uz = static_cast<std::size_t>(z);
                const std::size_t uy = static_cast<std::size_t>(y);
                const std::size_t ux = static_cast<std::size_t>(x);
                if (!allowed.at(uz, uy, ux) || lesion.at(uz, uy, ux)) continue;
                lesion.at(uz, uy, ux) = 1;
                added.push_back({z, y, x});
            }
    return added;
}

// Deterministic BFS fill within `allowed` until the lesion has `target`
// voxels. Falls back to a C-order scan if the BFS frontier empties.
void bfs_fill(Mask3& lesion, const Mask3& allowed, std::size_t target) {
    const auto& s = lesion.shape;
    std::deque<Voxel> queue;
    std::size_t count = lesion.count();
    for (std::size_t z = 0; z < s[0] && queue.empty(); ++z)
        for (std::size_t y = 0; y < s[1]; ++y)
            for (std::size_t x = 0; x < s[2]; ++x)
                if (lesion.at(z, y, x)) {
                    queue.push_back({static_cast<int>(z), static_cast<int>(y),
                                     static_cast<int>(x)});
                }
    if (queue.empty()) {
        // seed from the first allowed voxel
        for (std::size_t z = 0; z < s[0] && queue.empty(); ++z)
            for (std::size_t y = 0; y < s[1] && queue.empty(); ++y)
                for (std::size_t x = 0; x < s[2] && queue.empty(); ++x)
                    if (allowed.at(z, y, x)) {
                        lesion.at(z, y, x) = 1;
                        ++count;
                        queue.push_back({static_cast<int>(z), static_cast<int>(y),
                                         static_cast<int>(x)});
                    }
    }
    static constexpr int kNbr[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                       {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
    while (count < target && !queue.empty()) {
        const Voxel v = queue.front();
        queue.pop_front();
        for (const auto& n : kNbr) {
            const int z = v.z + n[0], y = v.y + n[1], x = v.x + n[2];
            if (z < 0 || y < 0 || x < 0 || z >= static_cast<int>(s[0]) ||
                y >= static_cast<int>(s[1]) || x >= static_cast<int>(s[2]))
                continue;
            const std::size_t uz = static_cast<std::size_t>(z);
            const std::size_t uy = static_cast<std::size_t>(y);
            const std::size_t ux = static_cast<std::size_t>(x);
            if (!allowed.at(uz, uy, ux) || lesion.at(uz, uy, ux)) continue;
            lesion.at(uz, uy, ux) = 1;
            queue.push_back({z, y, x});
            if (++count >= target) return;
        }
    }
    if (count < target) {
        for (std::size_t i = 0; i < lesion.data.size() && count < target; ++i)
            if (allowed.data[i] && !lesion.data[i]) {
                lesion.data[i] = 1;
                ++count;
            }
    }
}

} // namespace

double max_feasible_proportion(const Mask3& region, Pattern pattern, int margin_vox) {
    const std::size_t reg = region.count();
    require(reg > 0, "empty region");
    if (pattern != Pattern::paraseptal) return 1.0;
    const auto edt = squared_distance_to_outside(region);
    const float m2 = static_cast<float>(margin_vox) * static_cast<float>(margin_vox);
    std::size_t shell = 0;
    for (std::size_t i = 0; i < edt.size(); ++i)
        if (region.data[i] && edt[i] <= m2) ++shell;
    return static_cast<double>(shell) / static_cast<double>(reg);
}

LabeledSample generate_sample(const CohortSpec& spec, int target_grade, Pattern pattern,
                              std::uint64_t rng_seed) {
    require(target_grade >= 0 && target_grade <= 5, "grade out of range");
    Rng rng(rng_seed);

    LabeledSample s;
    s.region = make_region(spec, rng);
    const std::size_t reg_count = s.region.count();

    Mask3 lesion(spec.grid_shape);
    double proportion = 0.0;

    if (target_grade > 0) {
        const double t_lo = spec.thresholds.t[target_grade];
        const double t_hi = spec.thresholds.t[target_grade + 1];
        const double width = t_hi - t_lo;
        const double p_star = rng.uniform(t_lo + 0.1 * width, t_hi - 0.1 * width);
        const std::size_t target =
            static_cast<std::size_t>(std::llround(p_star * static_cast<double>(reg_count)));

        const auto edt = squared_distance_to_outside(s.region);
        const float m2 = static_cast<float>(spec.pattern_margin_vox) *
                         static_cast<float>(spec.pattern_margin_vox);

        Mask3 allowed(spec.grid_shape);
        std::vector<Voxel> seeds;
        for (std::size_t z = 0; z < spec.grid_shape[0]; ++z)
            for (std::size_t y = 0; y < spec.grid_shape[1]; ++y)
                for (std::size_t x = 0; x < spec.grid_shape[2]; ++x) {
                    if (!s.region.at(z, y, x)) continue;
                    const float d2 = edt[(z * spec.grid_shape[1] + y) * spec.grid_shape[2] + x];
                    const bool near_boundary = d2 <= m2;
                    if (pattern == Pattern::paraseptal) {
                        if (near_boundary) {
                            allowed.at(z, y, x) = 1;
                            seeds.push_back({static_cast<int>(z), static_cast<int>(y),
                                             static_cast<int>(x)});
                        }
                    } else {
                        allowed.at(z, y, x) = 1;
                        if (!near_boundary)
                            seeds.push_back({static_cast<int>(z), static_cast<int>(y),
                                             static_cast<int>(x)});
                    }
                }

        if (target == 0 || target > allowed.count() || seeds.empty())
            fail("cannot place proportion " + format_double(p_star) + " for pattern " +
                 pattern_name(pattern));

        std::vector<Voxel> last_blob;
        std::array<double, 3> last_center{};
        for (int tries = 0; tries < 200 && lesion.count() < target; ++tries) {
            const Voxel c = seeds[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(seeds.size()) - 1))];
            std::array<double, 3> radii{rng.uniform(1.6, 4.4), rng.uniform(1.6, 4.4),
                                        rng.uniform(1.6, 4.4)};
            auto added = add_blob(lesion, allowed, c, radii);
            if (!added.empty()) {
                last_blob = std::move(added);
                last_center = {static_cast<double>(c.z), static_cast<double>(c.y),
                               static_cast<double>(c.x)};
            }
        }
        if (lesion.count() < target) bfs_fill(lesion, allowed, target);

        // fine-tune: erode the last blob, outermost voxels first
        std::size_t have = lesion.count();
        if (have > target && !last_blob.empty()) {
            std::stable_sort(last_blob.begin(), last_blob.end(),
                             [&](const Voxel& a, const Voxel& b) {
                                 const auto d2 = [&](const Voxel& v) {
                                     const double dz = v.z - last_center[0];
                                     const double dy = v.y - last_center[1];
                                     const double dx = v.x - last_center[2];
                                     return dz * dz + dy * dy + dx * dx;
                                 };
                                 const double da = d2(a), db = d2(b);
                                 if (da != db) return da > db;
                                 return (a.z * 1000000 + a.y * 1000 + a.x) <
                                        (b.z * 1000000 + b.y * 1000 + b.x);
                             });
            for (const auto& v : last_blob) {
                if (have == target) break;
                auto& cell = lesion.at(static_cast<std::size_t>(v.z),
                                       static_cast<std::size_t>(v.y),
                                       static_cast<std::size_t>(v.x));
                if (cell) {
                    cell = 0;
                    --have;
                }
            }
        }
        require(lesion.count() == target, "lesion placement did not converge");

        proportion = static_cast<double>(target) / static_cast<double>(reg_count);
        require(proportion > t_lo && proportion < t_hi,
                "achieved proportion escaped the target interval");
        s.pattern = pattern;
    }

    // intensities: lesion voxels around lesion_intensity, everything else
    // background texture (preprocessing later masks the outside anyway)
    s.volume = Volume(spec.grid_shape);
    for (std::size_t i = 0; i < s.volume.data.size(); ++i) {
        if (lesion.data[i]) {
            s.volume.data[i] = static_cast<float>(spec.lesion_intensity +
                                                  spec.lesion_noise_sigma * rng.normal());
        } else {
            s.volume.data[i] = static_cast<float>(rng.uniform(
                spec.background_intensity_range[0], spec.background_intensity_range[1]));
        }
    }

    s.true_proportion = proportion;
    s.true_lesion = std::move(lesion);
    s.grade_rater1 = simulate_rater(proportion, spec.thresholds, spec.rater_confusion,
                                    derive_seed(rng_seed, rng_purpose::rater1));
    s.grade_rater2 = simulate_rater(proportion, spec.thresholds, spec.rater_confusion,
                                    derive_seed(rng_seed, rng_purpose::rater2));
    s.validate();
    return s;
}

int simulate_rater(double true_proportion, const ThresholdVector& thresholds, double confusion,
                   std::uint64_t rng_seed) {
    require(true_proportion >= 0.0 && true_proportion <= 1.0, "proportion outside [0,1]");
    int grade = grade_from_proportion(true_proportion, thresholds);
    Rng rng(rng_seed);
    if (rng.bernoulli(confusion)) {
        grade += rng.bernoulli(0.5) ? 1 : -1;
        grade = std::clamp(grade, 0, thresholds.ncat() - 1);
    }
    return grade;
}

CohortManifest generate_cohort(const CohortSpec& spec, const fs::path& out_dir) {
    spec.validate();
    fs::create_directories(out_dir);

    struct Plan {
        std::string id;
        int grade = 0;
        Pattern pattern = Pattern::none;
        std::uint64_t seed = 0;
    };
    std::vector<Plan> plans(static_cast<std::size_t>(spec.n_samples));
    for (int i = 0; i < spec.n_samples; ++i) {
        Plan& p = plans[static_cast<std::size_t>(i)];
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%04d", i);
        p.id = buf;
        p.seed = derive_seed(spec.seed, rng_purpose::sample, static_cast<std::uint64_t>(i));

        Rng grng(derive_seed(spec.seed, rng_purpose::grade_draw, static_cast<std::uint64_t>(i)));
        const double u = grng.uniform();
        double acc = 0.0;
        p.grade = 5;
        for (int g = 0; g < 6; ++g) {
            acc += spec.grade_distribution[static_cast<std::size_t>(g)];
            if (u < acc) {
                p.grade = g;
                break;
            }
        }
        if (p.grade > 0) {
            Rng prng(derive_seed(spec.seed, rng_purpose::pattern_draw,
                                 static_cast<std::uint64_t>(i)));
            p.pattern = prng.bernoulli(0.5) ? Pattern::paraseptal : Pattern::centrilobular;
        }
    }

    std::vector<LabeledSample> samples(plans.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(plans.size()); ++i) {
        const Plan& p = plans[static_cast<std::size_t>(i)];
        LabeledSample s;
        try {
            s = generate_sample(spec, p.grade, p.pattern, p.seed);
        } catch (const std::runtime_error& e) {
            // high grades cannot fit in the boundary shell; fall back
            if (p.pattern == Pattern::paraseptal &&
                std::string(e.what()).find("cannot place proportion") != std::string::npos) {
                s = generate_sample(spec, p.grade, Pattern::centrilobular, p.seed);
            } else {
                throw;
            }
        }
        s.id = p.id;
        samples[static_cast<std::size_t>(i)] = std::move(s);
    }

    CohortManifest manifest;
    manifest.spec = spec;
    std::vector<LabelRow> rows;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        save_sample(s, out_dir / s.id);

        CohortEntry e;
        e.id = s.id;
        e.grade_true = grade_from_proportion(*s.true_proportion, spec.thresholds);
        e.grade_rater1 = s.grade_rater1;
        e.grade_rater2 = s.grade_rater2;
        e.proportion = *s.true_proportion;
        e.pattern = s.pattern;
        e.sample_seed = plans[i].seed;
        for (const char* f : {"volume.raw", "region.raw", "lesion.raw", "meta.json"}) {
            const fs::path path = out_dir / s.id / f;
            if (fs::exists(path)) e.checksums.emplace_back(f, file_checksum(path));
        }
        manifest.entries.push_back(std::move(e));

        rows.push_back({s.id, s.grade_rater1, s.grade_rater2, *s.true_proportion,
                        pattern_name(s.pattern)});
    }
    write_labels_csv(rows, out_dir / "labels.csv");
    write_cohort_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

} // namespace llpq
