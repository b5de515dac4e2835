#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "spsconv/core.hpp"

namespace spsconv {

// Cubic kernel geometry. Only odd sizes are supported so the window is
// centred; stride is per axis.
struct KernelSpec {
    int32_t size = 3;
    std::array<int32_t, 3> stride{1, 1, 1};

    int64_t volume() const { return int64_t(size) * size * size; }
    bool unit_stride() const { return stride[0] == 1 && stride[1] == 1 && stride[2] == 1; }

    // Throws std::invalid_argument on even/non-positive size or stride < 1.
    void validate() const;
};

// All size^3 offsets in {-(size-1)/2 .. (size-1)/2}^3, lexicographic on
// (dx, dy, dz). This order fixes both the weight layout and the
// floating-point accumulation order of every convolution.
std::vector<std::array<int32_t, 3>> kernel_offsets(const KernelSpec& spec);

// Gather/scatter plan for one convolution. pairs[k] lists
// (input_row, output_row) for kernel offset k, ordered by output_row;
// out_coords is canonically ordered and expressed in the output frame.
struct Rulebook {
    enum class Mode { submanifold, regular };

    Mode mode = Mode::submanifold;
    std::vector<std::array<int32_t, 3>> offsets;
    std::vector<std::vector<std::pair<int32_t, int32_t>>> pairs;
    std::vector<Coord> out_coords;
    std::array<int32_t, 3> out_spatial_shape{0, 0, 0};
    std::array<int32_t, 3> stride{1, 1, 1};
    // Number of stride-aligned candidate outputs before any restriction
    // (regular mode only); used to report suppressed positions.
    int64_t candidate_count = 0;

    int64_t pair_count() const;
};

// Output positions equal input positions: for each output position p (all
// rows, or the rows in `active_out` when given) and each offset k with
// p + k active, the pair (row(p+k), row(p)) is recorded under k. Rows not in
// `active_out` stay in out_coords but receive no pairs. Requires unit stride.
Rulebook build_subm_rulebook(const SparseTensor& t, const KernelSpec& spec,
                             const std::vector<int32_t>* active_out = nullptr);

// Downsampling convolution. Candidate outputs are {p + k | p active, k in
// kernel}, kept when every axis is divisible by the stride and inside the
// grid, then divided by the stride. When `allowed_out` (output-frame coords)
// is given, candidates are intersected with it. Each retained output at
// input-space base q = stride * j gathers every active q + k.
Rulebook build_regular_rulebook(const SparseTensor& t, const KernelSpec& spec,
                                const std::vector<Coord>* allowed_out = nullptr);

// Structural FLOP count: one multiply and one add per pair per channel pair.
int64_t flops_of(const Rulebook& rb, int64_t c_in, int64_t c_out);

}  // namespace spsconv
