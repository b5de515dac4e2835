#include "spsconv/oracle.hpp"

#include <stdexcept>
#include <string>

namespace spsconv {

DenseVolume densify(const SparseTensor& t) {
    validate_tensor(t);
    DenseVolume v;
    v.channels = t.channels;
    v.shape = t.spatial_shape;
    v.batches = 1;
    for (const Coord& c : t.coords) v.batches = std::max(v.batches, c.b + 1);
    v.data.assign(size_t(v.batches) * size_t(v.channels) * size_t(v.shape[0]) *
                      size_t(v.shape[1]) * size_t(v.shape[2]),
                  0.0f);
    for (int64_t i = 0; i < t.size(); ++i) {
        const Coord& c = t.coords[size_t(i)];
        if (c.b < 0 || c.x < 0 || c.x >= v.shape[0] || c.y < 0 || c.y >= v.shape[1] || c.z < 0 ||
            c.z >= v.shape[2])
            throw std::domain_error("coordinate outside the tensor's grid at row " +
                                    std::to_string(i));
        for (int32_t ch = 0; ch < t.channels; ++ch)
            v.at(c.b, ch, c.x, c.y, c.z) = t.at(i, ch);
    }
    return v;
}

SparseTensor sparsify(const DenseVolume& v) {
    SparseTensor t;
    t.channels = v.channels;
    t.spatial_shape = v.shape;
    t.stride_level = {1, 1, 1};
    // Scan in canonical order (b, z, y, x) so the result needs no sort.
    for (int32_t b = 0; b < v.batches; ++b)
        for (int32_t z = 0; z < v.shape[2]; ++z)
            for (int32_t y = 0; y < v.shape[1]; ++y)
                for (int32_t x = 0; x < v.shape[0]; ++x) {
                    bool any = false;
                    for (int32_t c = 0; c < v.channels && !any; ++c)
                        any = v.at(b, c, x, y, z) != 0.0f;
                    if (!any) continue;
                    t.coords.push_back({b, x, y, z});
                    for (int32_t c = 0; c < v.channels; ++c)
                        t.features.push_back(v.at(b, c, x, y, z));
                }
    return t;
}

DenseVolume dense_conv3d(const DenseVolume& v, const ConvWeights& w,
                         const std::array<int32_t, 3>& stride) {
    w.validate();
    if (v.channels != w.c_in)
        throw shape_error("volume channel count does not match weights");
    for (int a = 0; a < 3; ++a)
        if (stride[a] < 1) throw std::invalid_argument("stride must be >= 1 on every axis");

    const int32_t k = w.kernel_size;
    const int32_t r = (k - 1) / 2;

    DenseVolume out;
    out.batches = v.batches;
    out.channels = w.c_out;
    for (int a = 0; a < 3; ++a) out.shape[a] = (v.shape[a] + stride[a] - 1) / stride[a];
    out.data.assign(size_t(out.batches) * size_t(out.channels) * size_t(out.shape[0]) *
                        size_t(out.shape[1]) * size_t(out.shape[2]),
                    0.0f);

    // Plain triple loop with zero padding (k-1)/2: out[j] = sum over the
    // centred window around stride*j. Kept deliberately naive; this is the
    // reference the sparse operators are validated against.
    for (int32_t b = 0; b < v.batches; ++b)
        for (int32_t co = 0; co < w.c_out; ++co)
            for (int32_t ox = 0; ox < out.shape[0]; ++ox)
                for (int32_t oy = 0; oy < out.shape[1]; ++oy)
                    for (int32_t oz = 0; oz < out.shape[2]; ++oz) {
                        double acc = 0.0;
                        for (int32_t dx = -r; dx <= r; ++dx)
                            for (int32_t dy = -r; dy <= r; ++dy)
                                for (int32_t dz = -r; dz <= r; ++dz) {
                                    const int32_t ix = ox * stride[0] + dx;
                                    const int32_t iy = oy * stride[1] + dy;
                                    const int32_t iz = oz * stride[2] + dz;
                                    if (ix < 0 || ix >= v.shape[0] || iy < 0 ||
                                        iy >= v.shape[1] || iz < 0 || iz >= v.shape[2])
                                        continue;
                                    const int64_t kidx =
                                        (int64_t(dx + r) * k + (dy + r)) * k + (dz + r);
                                    for (int32_t ci = 0; ci < w.c_in; ++ci)
                                        acc += double(v.at(b, ci, ix, iy, iz)) *
                                               double(w.data[(kidx * w.c_in + ci) * w.c_out + co]);
                                }
                        out.at(b, co, ox, oy, oz) = float(acc);
                    }
    return out;
}

}  // namespace spsconv
