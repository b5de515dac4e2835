#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spsconv/conv.hpp"
#include "spsconv/core.hpp"

namespace spsconv {

// Dense reference volume, indexed [batch][channel][x][y][z]. This module is
// the independent check for the sparse path: it deliberately shares no
// execution code with the rulebook machinery, only the plain data types.
struct DenseVolume {
    int32_t batches = 0;
    int32_t channels = 0;
    std::array<int32_t, 3> shape{0, 0, 0};
    std::vector<float> data;

    int64_t index(int32_t b, int32_t c, int32_t x, int32_t y, int32_t z) const {
        return (((int64_t(b) * channels + c) * shape[0] + x) * shape[1] + y) * shape[2] + z;
    }
    float at(int32_t b, int32_t c, int32_t x, int32_t y, int32_t z) const {
        return data[index(b, c, x, y, z)];
    }
    float& at(int32_t b, int32_t c, int32_t x, int32_t y, int32_t z) {
        return data[index(b, c, x, y, z)];
    }
};

// Scatters a sparse tensor into a zero-filled volume. Throws
// std::domain_error when a coordinate lies outside the tensor's grid.
DenseVolume densify(const SparseTensor& t);

// Collects every row with a non-zero feature channel back into a sparse
// tensor (canonical order by construction).
SparseTensor sparsify(const DenseVolume& v);

// Naive strided 3D convolution: odd kernel, zero padding (k-1)/2, output
// extent ceil(shape / stride) per axis, no bias. Triple loop over every
// output cell; the oracle the sparse operators are tested against.
DenseVolume dense_conv3d(const DenseVolume& v, const ConvWeights& w,
                         const std::array<int32_t, 3>& stride);

}  // namespace spsconv
