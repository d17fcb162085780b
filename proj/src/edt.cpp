#include "llpq/edt.hpp"

#include <algorithm>
#include <limits>

namespace llpq {

namespace {

constexpr float kInf = std::numeric_limits<float>::max() / 4;

// 1-D squared distance transform (Felzenszwalb & Huttenlocher) of the
// sampled function f, written back into f. v/z/d are scratch of size n / n+1 / n.
void dt1d(float* f, int n, int* v, float* z, float* d) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        float s;
        while (true) {
            const int p = v[k];
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0f * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const int p = v[k];
        d[q] = (q - p) * (q - p) + f[p];
    }
    std::copy(d, d + n, f);
}

} // namespace

std::vector<float> squared_distance_to_outside(const Mask3& mask) {
    const std::size_t D = mask.shape[0], H = mask.shape[1], W = mask.shape[2];
    std::vector<float> dist(D * H * W);

    // Seed along x, treating positions beyond the grid as outside.
    for (std::size_t z = 0; z < D; ++z)
        for (std::size_t y = 0; y < H; ++y) {
            float* row = dist.data() + (z * H + y) * W;
            const std::uint8_t* m = mask.data.data() + (z * H + y) * W;
            // forward sweep from the virtual outside at x = -1
            float run = 0.0f; // distance to last outside voxel
            for (std::size_t x = 0; x < W; ++x) {
                run = m[x] ? run + 1.0f : 0.0f;
                row[x] = run;
            }
            run = 0.0f;
            for (std::size_t x = W; x-- > 0;) {
                run = m[x] ? run + 1.0f : 0.0f;
                row[x] = std::min(row[x], run);
            }
            for (std::size_t x = 0; x < W; ++x) row[x] *= row[x];
        }

    const int nmax = static_cast<int>(std::max({D, H, W}));
    std::vector<int> v(nmax);
    std::vector<float> z(nmax + 1), d(nmax), line(nmax);

    // y passes
    for (std::size_t zz = 0; zz < D; ++zz)
        for (std::size_t x = 0; x < W; ++x) {
            for (std::size_t y = 0; y < H; ++y) line[y] = dist[(zz * H + y) * W + x];
            dt1d(line.data(), static_cast<int>(H), v.data(), z.data(), d.data());
            for (std::size_t y = 0; y < H; ++y) dist[(zz * H + y) * W + x] = line[y];
        }
    // z passes
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
            for (std::size_t zz = 0; zz < D; ++zz) line[zz] = dist[(zz * H + y) * W + x];
            dt1d(line.data(), static_cast<int>(D), v.data(), z.data(), d.data());
            for (std::size_t zz = 0; zz < D; ++zz) dist[(zz * H + y) * W + x] = line[zz];
        }

    // The x seeding already saw the virtual outside beyond the x borders;
    // fold in the y/z border planes the same way.
    for (std::size_t zz = 0; zz < D; ++zz) {
        const float zb = static_cast<float>(std::min(zz + 1, D - zz));
        for (std::size_t y = 0; y < H; ++y) {
            const float yb = static_cast<float>(std::min(y + 1, H - y));
            const float cap = std::min(zb * zb, yb * yb);
            float* row = dist.data() + (zz * H + y) * W;
            for (std::size_t x = 0; x < W; ++x) row[x] = std::min(row[x], cap);
        }
    }

    // Outside voxels are distance 0 by definition.
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (!mask.data[i]) dist[i] = 0.0f;
    return dist;
}

} // namespace llpq
