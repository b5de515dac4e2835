#pragma once

#include <string>
#include <vector>

#include "spsconv/core.hpp"

namespace spsconv {

// Point set in metres. `xyz` is 3N doubles, `features` is row-major N x channels.
struct PointCloud {
    std::vector<double> xyz;
    std::vector<float> features;
    int32_t channels = 1;

    int64_t size() const { return int64_t(xyz.size() / 3); }
};

// Text format: one point per line, "x y z f1 [f2 ...]", whitespace separated.
// Binary format: packed little-endian float32 records (x, y, z, intensity).
// read_points dispatches on the file extension (".txt" or ".bin").
PointCloud read_points(const std::string& path);
PointCloud read_points_txt(const std::string& path);
PointCloud read_points_bin(const std::string& path);

void write_points_txt(const PointCloud& pc, const std::string& path);
void write_points_bin(const PointCloud& pc, const std::string& path);

// Sidecar label files: one integer per line, 0 = background, 1 = foreground,
// aligned with the point file line/record order.
std::vector<int> read_labels(const std::string& path);
void write_labels(const std::vector<int>& labels, const std::string& path);

// Quantizes points onto the grid: cell = floor((p - origin) / voxel_size).
// Points falling outside [0, shape) on any axis are dropped (a point exactly
// on the upper boundary is outside). Features of points sharing a cell are
// mean-pooled. The result is canonically ordered with stride_level (1,1,1).
SparseTensor voxelize(const PointCloud& pc, const VoxelGridSpec& grid);

}  // namespace spsconv
