#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spsconv/core.hpp"
#include "spsconv/voxelize.hpp"

namespace spsconv {

// Synthetic LiDAR-like scene: background points scattered over a thin ground
// band with low intensity, plus compact foreground clusters with scaled
// intensity floating above the band. Points are placed on distinct voxel
// centres (no two points share a cell, background and foreground never
// collide), so point labels map 1:1 onto voxel labels and the foreground
// fraction is exactly cluster points / total points.
struct SceneSpec {
    VoxelGridSpec grid;
    int64_t n_background = 2375;
    int32_t n_foreground_clusters = 25;
    int32_t cluster_size = 5;
    double foreground_feature_scale = 6.0;
    uint64_t seed = 1;

    // Throws config_error when the grid is too small for the layout or the
    // background does not fit the ground band.
    void validate() const;
};

struct Scene {
    PointCloud points;        // intensity-only (channels == 1)
    std::vector<int> labels;  // per point, 1 = foreground
};

// Deterministic for a given spec. The background imitates a range scan taken
// from the grid centre: point density and intensity both fall off with range,
// so importance rankings on the background are spatially coherent rather
// than salt-and-pepper noise.
Scene synth_scene(const SceneSpec& spec);

}  // namespace spsconv
