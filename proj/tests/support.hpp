// Shared helpers for the test suites: tensor builders, seeded random scenes,
// independently coded reference routines, and tolerant comparisons.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "spsconv/core.hpp"
#include "spsconv/rulebook.hpp"

namespace testsupport {

using spsconv::Coord;
using spsconv::SparseTensor;

// Independent sigmoid for checking the magnitude mask: a different identity
// than the exp form the library uses.
inline double sigmoid_oracle(double x) { return 0.5 * (1.0 + std::tanh(0.5 * x)); }

inline SparseTensor make_tensor(std::vector<Coord> coords, std::vector<float> features,
                                int32_t channels, std::array<int32_t, 3> shape) {
    SparseTensor t;
    t.coords = std::move(coords);
    t.features = std::move(features);
    t.channels = channels;
    t.spatial_shape = shape;
    t.stride_level = {1, 1, 1};
    return t;
}

inline double unit_double(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Random occupancy grid, canonical order by construction (cells visited in
// (z, y, x) ascending), feature values uniform in [lo, hi).
inline SparseTensor random_tensor(uint64_t seed, std::array<int32_t, 3> shape, double density,
                                  int32_t channels, float lo = -1.0f, float hi = 1.0f) {
    std::mt19937_64 rng(seed);
    SparseTensor t;
    t.channels = channels;
    t.spatial_shape = shape;
    t.stride_level = {1, 1, 1};
    for (int32_t z = 0; z < shape[2]; ++z)
        for (int32_t y = 0; y < shape[1]; ++y)
            for (int32_t x = 0; x < shape[0]; ++x) {
                if (unit_double(rng) >= density) continue;
                t.coords.push_back({0, x, y, z});
                for (int32_t c = 0; c < channels; ++c)
                    t.features.push_back(float(lo + (hi - lo) * unit_double(rng)));
            }
    return t;
}

// |a - b| scaled against max(1, |a|, |b|): relative for large values,
// absolute near zero.
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double max_rel_err(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return 1e30;
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_err(a[i], b[i]));
    return worst;
}

// Reference pair enumeration for the submanifold rulebook: quadratic scan
// over coordinate pairs, no hashing. Returns (offset_index, in_row, out_row)
// sorted the way the rulebook stores pairs.
inline std::vector<std::tuple<int, int, int>> brute_subm_pairs(const std::vector<Coord>& coords,
                                                               int32_t k) {
    const int32_t r = (k - 1) / 2;
    std::vector<std::tuple<int, int, int>> out;
    for (size_t o = 0; o < coords.size(); ++o)
        for (size_t i = 0; i < coords.size(); ++i) {
            if (coords[i].b != coords[o].b) continue;
            const int32_t dx = coords[i].x - coords[o].x;
            const int32_t dy = coords[i].y - coords[o].y;
            const int32_t dz = coords[i].z - coords[o].z;
            if (std::abs(dx) > r || std::abs(dy) > r || std::abs(dz) > r) continue;
            const int kidx = ((dx + r) * k + (dy + r)) * k + (dz + r);
            out.emplace_back(kidx, int(i), int(o));
        }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        if (std::get<2>(a) != std::get<2>(b)) return std::get<2>(a) < std::get<2>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    return out;
}

// Reference output set for the regular rulebook, from the gather side: scan
// every cell of the output grid and keep those with an active input in their
// kernel window (equivalent to the scatter/dilation definition because the
// centred offset set is symmetric).
inline std::vector<Coord> brute_regular_outputs(const std::vector<Coord>& coords, int32_t k,
                                                std::array<int32_t, 3> stride,
                                                std::array<int32_t, 3> shape) {
    const int32_t r = (k - 1) / 2;
    std::vector<int32_t> batches;
    for (const Coord& c : coords) batches.push_back(c.b);
    std::sort(batches.begin(), batches.end());
    batches.erase(std::unique(batches.begin(), batches.end()), batches.end());

    const auto out_shape = spsconv::ceil_div(shape, stride);
    std::vector<Coord> out;
    for (int32_t b : batches)
        for (int32_t jz = 0; jz < out_shape[2]; ++jz)
            for (int32_t jy = 0; jy < out_shape[1]; ++jy)
                for (int32_t jx = 0; jx < out_shape[0]; ++jx) {
                    bool hit = false;
                    for (const Coord& p : coords) {
                        if (p.b != b) continue;
                        if (std::abs(p.x - jx * stride[0]) <= r &&
                            std::abs(p.y - jy * stride[1]) <= r &&
                            std::abs(p.z - jz * stride[2]) <= r) {
                            hit = true;
                            break;
                        }
                    }
                    if (hit) out.push_back({b, jx, jy, jz});
                }
    return out;  // canonical: (b, z, y, x) ascending loop order
}

}  // namespace testsupport
