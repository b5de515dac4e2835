#include "spsconv/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace spsconv {

namespace {

constexpr int32_t kBandCells = 2;  // ground band thickness, in cells
constexpr int32_t kMarginXY = 3;   // cluster keep-out from the grid edge

double unit_double(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

int32_t uniform_below(std::mt19937_64& rng, int32_t n) {
    // Unbiased bounded draw; deterministic across standard libraries.
    const uint64_t span = uint64_t(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return int32_t(r % span);
}

int32_t cluster_half_extent(int32_t cluster_size) {
    // Box large enough that rejection sampling of distinct cells stays cheap:
    // (2h+1)^3 >= 2 * cluster_size.
    int32_t h = 1;
    while (int64_t(2 * h + 1) * (2 * h + 1) * (2 * h + 1) < 2 * int64_t(cluster_size)) ++h;
    return h;
}

}  // namespace

void SceneSpec::validate() const {
    grid.validate();
    if (n_background < 0) throw config_error("n_background must be >= 0");
    if (n_foreground_clusters < 0) throw config_error("n_foreground_clusters must be >= 0");
    if (cluster_size < 1) throw config_error("cluster_size must be >= 1");
    if (!(foreground_feature_scale > 1.0))
        throw config_error("foreground_feature_scale must be > 1");

    const int64_t band_capacity =
        int64_t(grid.shape[0]) * grid.shape[1] * std::min(kBandCells, grid.shape[2]);
    if (n_background > band_capacity / 2)
        throw config_error("n_background exceeds half the ground band (" +
                           std::to_string(band_capacity) + " cells); enlarge the grid");
    if (n_foreground_clusters > 0) {
        const int32_t h = cluster_half_extent(cluster_size);
        if (grid.shape[0] < 2 * (kMarginXY + h) + 1 || grid.shape[1] < 2 * (kMarginXY + h) + 1 ||
            grid.shape[2] < kBandCells + 2 * h + 1)
            throw config_error("grid too small for the requested clusters");
    }
}

Scene synth_scene(const SceneSpec& spec) {
    spec.validate();
    const auto& shape = spec.grid.shape;
    std::mt19937_64 rng(spec.seed);

    Scene scene;
    scene.points.channels = 1;
    CoordSet used;

    const double cx = double(shape[0]) / 2.0;
    const double cy = double(shape[1]) / 2.0;
    const double r_max = std::hypot(cx, cy);

    auto emit = [&](const Coord& cell, double intensity, int label) {
        used.insert(cell);
        scene.points.xyz.insert(
            scene.points.xyz.end(),
            {spec.grid.origin[0] + (double(cell.x) + 0.5) * spec.grid.voxel_size[0],
             spec.grid.origin[1] + (double(cell.y) + 0.5) * spec.grid.voxel_size[1],
             spec.grid.origin[2] + (double(cell.z) + 0.5) * spec.grid.voxel_size[2]});
        scene.points.features.push_back(float(intensity));
        scene.labels.push_back(label);
    };

    // Ground band, modelled on a range scan from a sensor at the grid centre:
    // constant points per range ring (so areal density thins as 1/range) and
    // return strength decaying exponentially with range. The decay is
    // deliberately steep: importance rankings downstream follow feature
    // magnitude, and after a few convolutions of random weights each point's
    // neighborhood spans roughly a 3x magnitude spread on its own. Separating
    // points by much more than that keeps the rankings spatially coherent
    // (whole neighborhoods rank together) instead of salt-and-pepper.
    const int32_t band = std::min(kBandCells, shape[2]);
    for (int64_t i = 0; i < spec.n_background; ++i) {
        Coord cell{0, 0, 0, 0};
        do {
            const double rho = unit_double(rng);
            const double theta = 2.0 * std::numbers::pi * unit_double(rng);
            cell.x = int32_t(std::floor(cx + rho * r_max * std::cos(theta)));
            cell.y = int32_t(std::floor(cy + rho * r_max * std::sin(theta)));
            cell.z = uniform_below(rng, band);
        } while (cell.x < 0 || cell.x >= shape[0] || cell.y < 0 || cell.y >= shape[1] ||
                 used.count(cell));
        const double base = 0.1 + 0.2 * unit_double(rng);
        const double range = std::hypot(double(cell.x) + 0.5 - cx, double(cell.y) + 0.5 - cy);
        emit(cell, base * std::exp(-8.0 * std::min(1.0, range / r_max)), 0);
    }

    // Compact clusters floating above the band, intensity scaled up.
    const int32_t h = cluster_half_extent(spec.cluster_size);
    for (int32_t c = 0; c < spec.n_foreground_clusters; ++c) {
        const int32_t ccx = kMarginXY + h + uniform_below(rng, shape[0] - 2 * (kMarginXY + h));
        const int32_t ccy = kMarginXY + h + uniform_below(rng, shape[1] - 2 * (kMarginXY + h));
        const int32_t ccz = band + h + uniform_below(rng, shape[2] - band - 2 * h);
        int32_t reach = h;
        for (int32_t j = 0; j < spec.cluster_size; ++j) {
            Coord cell{0, 0, 0, 0};
            int attempts = 0;
            do {
                cell.x = ccx - reach + uniform_below(rng, 2 * reach + 1);
                cell.y = ccy - reach + uniform_below(rng, 2 * reach + 1);
                cell.z = ccz - reach + uniform_below(rng, 2 * reach + 1);
                // Widen the box in the (unlikely) event a previous cluster
                // already covers most of it.
                if (++attempts > 64 * spec.cluster_size) {
                    ++reach;
                    attempts = 0;
                }
            } while (used.count(cell) || cell.x < 0 || cell.x >= shape[0] || cell.y < 0 ||
                     cell.y >= shape[1] || cell.z < band || cell.z >= shape[2]);
            const double base = 0.1 + 0.2 * unit_double(rng);
            emit(cell, base * spec.foreground_feature_scale, 1);
        }
    }
    return scene;
}

}  // namespace spsconv
