#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spsconv/conv.hpp"
#include "spsconv/core.hpp"
#include "spsconv/pruning.hpp"

namespace spsconv {

// Four-stage sparse CNN used by the measurement harness: a stem submanifold
// block, then per stage one downsampling block followed by two submanifold
// blocks (each block = conv + per-channel affine + ReLU). In pruned mode the
// submanifold convolutions become SPSS and the strided downsampling
// convolutions become SPRS; the stem and the stride-1 stage-1 downsampling
// block are never pruned.
struct BackboneConfig {
    int32_t in_channels = 1;
    int32_t stem_channels = 16;
    std::array<int32_t, 4> stage_channels{16, 32, 64, 128};
    std::array<int32_t, 4> stage_strides{1, 2, 2, 2};
    std::array<double, 4> subm_ratios{0.0, 0.0, 0.0, 0.0};
    std::array<double, 3> down_ratios{0.0, 0.0, 0.0};  // stages 2..4
    int32_t kernel_size = 3;

    enum class Mode { baseline, pruned };
    Mode mode = Mode::baseline;

    SelectionStrategy::Kind strategy = SelectionStrategy::Kind::magnitude;
    uint64_t seed = 0;

    // Throws config_error on out-of-range ratios, bad channel counts, even
    // kernels, or a strided first stage.
    void validate() const;
};

// Which convolutions are substituted by their pruned variants. The config's
// mode maps to none/both; the sweep command also measures the two
// single-substitution variants.
enum class Substitution { none, spss_only, sprs_only, both };

struct LayerStats {
    std::string name;
    std::string kind;           // "subm" | "regular" | "spss" | "sprs"
    int64_t voxels_out = 0;
    int64_t flops = 0;
    int64_t convolved = 0;      // spss: |im|; sprs/regular: output positions
    int64_t skipped = 0;        // spss: |nim|; sprs: suppressed candidates
};

// Recorded after every stage (and once for the stem). positions_convolved /
// positions_skipped describe the stage's submanifold layers, which share one
// voxel set, so convolved + skipped = active_voxel_count.
struct StageStats {
    std::string name;
    int64_t active_voxel_count = 0;
    int64_t conv_flops = 0;
    int64_t positions_convolved = 0;
    int64_t positions_skipped = 0;
    std::vector<LayerStats> layers;
};

struct Block {
    enum class Kind { subm, regular, spss, sprs };
    Kind kind = Kind::subm;
    std::string name;
    KernelSpec spec;
    ConvWeights w;
    double ratio = 0.0;
    uint64_t strategy_seed = 0;  // per-block stream for the random strategy
};

struct Backbone {
    BackboneConfig cfg;
    Substitution substitution = Substitution::none;
    Block stem;
    struct Stage {
        Block down;
        Block subm1;
        Block subm2;
    };
    std::array<Stage, 4> stages;
};

// Weights are drawn from cfg.seed in a fixed block order, independent of the
// substitution, so baseline and pruned variants of one config share weights.
Backbone build_backbone(const BackboneConfig& cfg);
Backbone build_backbone(const BackboneConfig& cfg, Substitution sub);

struct ForwardResult {
    SparseTensor out;
    std::vector<StageStats> stats;  // stem, stage1..stage4
    int64_t total_conv_flops = 0;
};

// Runs the network. When `stage_outputs` is given it receives the tensor
// after the stem and after each stage (5 entries). Deterministic: the same
// backbone and input produce byte-identical results.
ForwardResult forward(const Backbone& bb, const SparseTensor& input,
                      std::vector<SparseTensor>* stage_outputs = nullptr);

}  // namespace spsconv
