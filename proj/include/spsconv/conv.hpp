#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spsconv/core.hpp"
#include "spsconv/rulebook.hpp"

namespace spsconv {

// Convolution weights, offset-major: data[k][ci][co] with k indexing
// kernel_offsets order. gamma/beta, when present (size c_out), are the
// per-channel affine a block applies after the convolution.
struct ConvWeights {
    int32_t kernel_size = 3;
    int32_t c_in = 0;
    int32_t c_out = 0;
    std::vector<float> data;
    std::vector<float> gamma;
    std::vector<float> beta;

    bool has_affine() const { return !gamma.empty() && !beta.empty(); }

    float at(int64_t k, int32_t ci, int32_t co) const {
        return data[(k * c_in + ci) * c_out + co];
    }
    float& at(int64_t k, int32_t ci, int32_t co) {
        return data[(k * c_in + ci) * c_out + co];
    }

    // Throws shape_error when sizes are inconsistent.
    void validate() const;

    // Every weight the same value; affine left empty.
    static ConvWeights filled(int32_t k, int32_t c_in, int32_t c_out, float value);

    // 1x1x1 identity mapping (c x c).
    static ConvWeights identity(int32_t c);

    // Uniform in [-a, a] with a = sqrt(1 / (k^3 * c_in)), drawn from a
    // seeded generator; byte-reproducible across runs. Affine set to
    // gamma = 1, beta = 0.
    static ConvWeights seeded_uniform(int32_t k, int32_t c_in, int32_t c_out, uint64_t seed);
};

// Binary weight file: magic "SPSW", then u32 kernel_size, u32 c_in, u32
// c_out, then k^3*c_in*c_out float32 weights offset-major, then optionally
// gamma and beta (c_out float32 each). All little-endian.
ConvWeights load_weights(const std::string& path);
void save_weights(const ConvWeights& w, const std::string& path);

// Executes a rulebook: out[j] += W_k^T x[i] for every pair (i, j) under
// offset k, offsets accumulated in canonical order. Rows with no pairs are
// zero. No bias. The result inherits the rulebook's output frame and
// multiplies stride_level by the rulebook stride.
SparseTensor apply_rulebook(const SparseTensor& x, const Rulebook& rb, const ConvWeights& w);

// Submanifold convolution: output positions equal input positions.
SparseTensor subm_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w);

// Regular (downsampling) convolution over all stride-aligned candidates.
SparseTensor regular_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w);

enum class ConvMode {
    automatic,  // submanifold at unit stride, regular otherwise
    submanifold,
    regular,
};

// One backbone block: convolution, then per-channel affine
// (gamma * y + beta, the training-free stand-in for batch norm), then ReLU.
// Requires w.has_affine().
SparseTensor block_forward(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                           ConvMode mode = ConvMode::automatic);

// The affine + ReLU tail of a block, applied in place.
void affine_relu_inplace(SparseTensor& t, const ConvWeights& w);

}  // namespace spsconv
