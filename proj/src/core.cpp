#include "spsconv/core.hpp"

#include <algorithm>
#include <numeric>

namespace spsconv {

void VoxelGridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (shape[a] <= 0)
            throw config_error("grid shape must be positive on every axis");
        if (!(voxel_size[a] > 0.0))
            throw config_error("voxel size must be positive on every axis");
    }
}

void validate_tensor(const SparseTensor& t) {
    if (t.channels < 0) throw shape_error("negative channel count");
    if (int64_t(t.features.size()) != t.size() * t.channels)
        throw shape_error("feature buffer size does not match rows * channels");
}

CoordIndex build_index(const SparseTensor& t) {
    CoordIndex index;
    index.reserve(t.coords.size() * 2);
    for (size_t i = 0; i < t.coords.size(); ++i) {
        auto [it, inserted] = index.emplace(t.coords[i], int32_t(i));
        if (!inserted)
            throw shape_error("duplicate coordinate at rows " + std::to_string(it->second) +
                              " and " + std::to_string(i));
    }
    return index;
}

bool is_canonical(const SparseTensor& t) {
    for (size_t i = 1; i < t.coords.size(); ++i)
        if (!canonical_less(t.coords[i - 1], t.coords[i])) return false;
    return true;
}

SparseTensor canonicalize(const SparseTensor& t) {
    validate_tensor(t);
    std::vector<int64_t> order(t.coords.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
        if (t.coords[a] == t.coords[b]) return a < b;  // stable under duplicates
        return canonical_less(t.coords[a], t.coords[b]);
    });

    SparseTensor out;
    out.channels = t.channels;
    out.spatial_shape = t.spatial_shape;
    out.stride_level = t.stride_level;
    out.coords.resize(t.coords.size());
    out.features.resize(t.features.size());
    for (size_t i = 0; i < order.size(); ++i) {
        out.coords[i] = t.coords[order[i]];
        std::copy_n(t.row(order[i]), t.channels, out.row(int64_t(i)));
    }
    return out;
}

}  // namespace spsconv
