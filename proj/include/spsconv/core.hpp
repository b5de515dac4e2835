#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace spsconv {

// Error taxonomy. Configuration problems exit the CLI with code 2,
// input/output problems with code 3; everything else is a programming error.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension mismatch between tensors, weights and rulebooks.
struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Voxel location: batch index plus integer grid cell.
struct Coord {
    int32_t b = 0;
    int32_t x = 0;
    int32_t y = 0;
    int32_t z = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
};

// Canonical ordering of coordinates: lexicographic on (b, z, y, x).
// Every tensor produced by this library keeps its rows in this order so that
// floating-point accumulation happens in a reproducible sequence.
inline bool canonical_less(const Coord& a, const Coord& b) {
    if (a.b != b.b) return a.b < b.b;
    if (a.z != b.z) return a.z < b.z;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

inline uint64_t mix64(uint64_t v) {
    v += 0x9e3779b97f4a7c15ull;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
    return v ^ (v >> 31);
}

struct CoordHash {
    size_t operator()(const Coord& c) const {
        uint64_t lo = (uint64_t(uint32_t(c.x)) << 32) | uint32_t(c.y);
        uint64_t hi = (uint64_t(uint32_t(c.z)) << 32) | uint32_t(c.b);
        return size_t(mix64(lo ^ mix64(hi)));
    }
};

using CoordSet = std::unordered_set<Coord, CoordHash>;

// Geometry of the quantization grid, in metres.
struct VoxelGridSpec {
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    std::array<double, 3> voxel_size{0.1, 0.1, 0.1};
    std::array<int32_t, 3> shape{0, 0, 0};

    // Throws config_error on an empty grid or non-positive voxel size.
    void validate() const;
};

// Coordinate-sparse feature tensor. `features` is row-major N x channels.
// Invariants: rows unique, canonically ordered, features.size() == N * channels.
struct SparseTensor {
    std::vector<Coord> coords;
    std::vector<float> features;
    int32_t channels = 0;
    std::array<int32_t, 3> spatial_shape{0, 0, 0};
    std::array<int32_t, 3> stride_level{1, 1, 1};

    int64_t size() const { return int64_t(coords.size()); }

    const float* row(int64_t i) const { return features.data() + i * channels; }
    float* row(int64_t i) { return features.data() + i * channels; }

    float at(int64_t i, int32_t c) const { return features[i * channels + c]; }
    float& at(int64_t i, int32_t c) { return features[i * channels + c]; }
};

using CoordIndex = std::unordered_map<Coord, int32_t, CoordHash>;

// Hash index from coordinate to row. Throws shape_error on duplicate rows.
CoordIndex build_index(const SparseTensor& t);

// Returns a copy with rows sorted canonically (features permuted alongside).
// Idempotent; tensors with duplicate coordinates keep a stable tie order.
SparseTensor canonicalize(const SparseTensor& t);

bool is_canonical(const SparseTensor& t);

// Basic structural checks (feature size, channel count); throws shape_error.
void validate_tensor(const SparseTensor& t);

inline std::array<int32_t, 3> ceil_div(const std::array<int32_t, 3>& a,
                                       const std::array<int32_t, 3>& b) {
    return {int32_t((a[0] + b[0] - 1) / b[0]),
            int32_t((a[1] + b[1] - 1) / b[1]),
            int32_t((a[2] + b[2] - 1) / b[2])};
}

}  // namespace spsconv
