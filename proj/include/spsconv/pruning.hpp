#pragma once

#include <cstdint>
#include <vector>

#include "spsconv/conv.hpp"
#include "spsconv/core.hpp"
#include "spsconv/rulebook.hpp"

namespace spsconv {

// Per-row importance: g = mean(|feature|) over channels, m = sigmoid(g).
// g >= 0, so m lies in [0.5, 1).
struct MagnitudeScores {
    std::vector<float> g;
    std::vector<float> m;
};

MagnitudeScores magnitude_map(const SparseTensor& t);
MagnitudeScores magnitude_map(const float* features, int64_t n, int32_t channels);

// How rows are split into important / unimportant sets.
struct SelectionStrategy {
    enum class Kind {
        magnitude,  // keep the largest-g rows
        random,     // keep a seeded uniform sample
        inverse,    // drop the largest-g rows (keep the smallest)
    };

    Kind kind = Kind::magnitude;
    uint64_t seed = 0;

    static SelectionStrategy magnitude() { return {Kind::magnitude, 0}; }
    static SelectionStrategy random(uint64_t seed) { return {Kind::random, seed}; }
    static SelectionStrategy inverse() { return {Kind::inverse, 0}; }
};

SelectionStrategy::Kind strategy_from_string(const std::string& name);
const char* strategy_name(SelectionStrategy::Kind kind);

// Disjoint row split. im and nim are sorted ascending and cover every row.
struct Partition {
    std::vector<int32_t> im;
    std::vector<int32_t> nim;
    double ratio = 0.0;
};

// |nim| = floor(ratio * N). Rows are ranked by g descending with ties broken
// toward the lower row index; magnitude keeps the top of that ranking,
// inverse drops the top of the same ranking (so the k-th row magnitude
// admits is the k-th row inverse excludes), random keeps a uniform seeded
// sample. Throws config_error when ratio is outside [0, 1].
Partition partition(const MagnitudeScores& scores, double ratio, const SelectionStrategy& strategy);

// Re-weights every feature row by its own mask value: x~ = m * x.
SparseTensor mask_reweight(const SparseTensor& t, const MagnitudeScores& scores);

// mask[i] is true when every axis of coords[i] is divisible by the stride,
// i.e. sum_i (p_i mod s_i) == 0. Throws std::domain_error on negative axes.
std::vector<bool> stride_mask(const std::vector<Coord>& coords,
                              const std::array<int32_t, 3>& stride);

// Union of the kernel windows around p_im (which contains p_im itself, since
// the centre offset is in the kernel), clipped to [0, shape) per axis.
// Result is canonically ordered and duplicate-free.
std::vector<Coord> dilate_positions(const std::vector<Coord>& p_im, const KernelSpec& spec,
                                    const std::array<int32_t, 3>& spatial_shape);

// Output positions of the pruned downsampling convolution: stride-aligned
// members of dilate(P_im) union stride-aligned members of P_nim, divided by
// the stride. Canonically ordered, clipped to the output grid.
std::vector<Coord> sprs_output_positions(const Partition& part, const std::vector<Coord>& coords,
                                         const KernelSpec& spec,
                                         const std::array<int32_t, 3>& spatial_shape);

struct SpssResult {
    SparseTensor out;
    int64_t flops = 0;        // structural conv FLOPs (skip branch costs none)
    int64_t convolved = 0;    // |im|
    int64_t skipped = 0;      // |nim|
};

// Spatially pruned submanifold convolution. Every input row is re-weighted
// by its mask value; rows selected as important are convolved over their
// full input neighborhood, the rest pass their re-weighted features through
// unchanged. Output positions equal input positions. Requires unit stride
// and c_in == c_out.
SpssResult spss_conv_detail(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                            double ratio, const SelectionStrategy& strategy);
SparseTensor spss_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                       double ratio, const SelectionStrategy& strategy);

struct SprsResult {
    SparseTensor out;
    int64_t flops = 0;
    int64_t out_positions = 0;
    int64_t suppressed = 0;   // candidate outputs the pruning removed
};

// Spatially pruned regular convolution. Only important rows dilate; the
// output position set shrinks accordingly (features are not re-weighted,
// and every retained output still gathers its full input neighborhood).
SprsResult sprs_conv_detail(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                            double ratio, const SelectionStrategy& strategy);
SparseTensor sprs_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                       double ratio, const SelectionStrategy& strategy);

// floor(ratio * n) with a guard for parsed decimals that sit just below an
// integer after rounding (0.3 * 10 must count 3 rows, not 2).
int64_t unimportant_count(double ratio, int64_t n);

}  // namespace spsconv
