#include "spsconv/backbone.hpp"

#include <random>

namespace spsconv {

void BackboneConfig::validate() const {
    if (in_channels < 1 || stem_channels < 1)
        throw config_error("channel counts must be positive");
    for (int32_t c : stage_channels)
        if (c < 1) throw config_error("stage channel counts must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw config_error("backbone kernel size must be positive and odd");
    if (stage_strides[0] != 1)
        throw config_error("the first stage must keep stride 1 (there is no pruning ratio "
                           "for a strided first stage)");
    for (int32_t s : stage_strides)
        if (s < 1) throw config_error("stage strides must be >= 1");
    for (double r : subm_ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw config_error("subm_ratios must lie in [0, 1]");
    for (double r : down_ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw config_error("down_ratios must lie in [0, 1]");
}

Backbone build_backbone(const BackboneConfig& cfg) {
    return build_backbone(cfg, cfg.mode == BackboneConfig::Mode::pruned ? Substitution::both
                                                                        : Substitution::none);
}

Backbone build_backbone(const BackboneConfig& cfg, Substitution sub) {
    cfg.validate();
    const bool use_spss = sub == Substitution::spss_only || sub == Substitution::both;
    const bool use_sprs = sub == Substitution::sprs_only || sub == Substitution::both;

    Backbone bb;
    bb.cfg = cfg;
    bb.substitution = sub;

    // One weight stream in fixed block order. The substitution never touches
    // the stream, so every variant of one config shares identical weights.
    std::mt19937_64 wseed(cfg.seed);
    int block_ordinal = 0;
    auto make_block = [&](Block::Kind kind, const std::string& name, int32_t c_in, int32_t c_out,
                          int32_t stride, double ratio) {
        Block blk;
        blk.kind = kind;
        blk.name = name;
        blk.spec = KernelSpec{cfg.kernel_size, {stride, stride, stride}};
        blk.w = ConvWeights::seeded_uniform(cfg.kernel_size, c_in, c_out, wseed());
        blk.ratio = ratio;
        // Random-strategy streams come from a hash, not the weight stream.
        blk.strategy_seed = mix64(cfg.seed ^ mix64(uint64_t(block_ordinal) + 0x5eed));
        ++block_ordinal;
        return blk;
    };

    bb.stem = make_block(Block::Kind::subm, "stem", cfg.in_channels, cfg.stem_channels, 1, 0.0);

    int32_t c_prev = cfg.stem_channels;
    for (int s = 0; s < 4; ++s) {
        const std::string stage = "stage" + std::to_string(s + 1);
        const int32_t stride = cfg.stage_strides[size_t(s)];
        const int32_t c = cfg.stage_channels[size_t(s)];

        // Strided downsampling blocks take the SPRS substitute; the stride-1
        // stage-1 block stays a regular convolution in every mode.
        Block::Kind down_kind = Block::Kind::regular;
        double down_ratio = 0.0;
        if (stride > 1) {
            down_ratio = cfg.down_ratios[size_t(s - 1)];
            if (use_sprs) down_kind = Block::Kind::sprs;
        }
        bb.stages[size_t(s)].down =
            make_block(down_kind, stage + ".down", c_prev, c, stride, down_ratio);

        const Block::Kind subm_kind = use_spss ? Block::Kind::spss : Block::Kind::subm;
        const double subm_ratio = cfg.subm_ratios[size_t(s)];
        bb.stages[size_t(s)].subm1 =
            make_block(subm_kind, stage + ".subm1", c, c, 1, subm_ratio);
        bb.stages[size_t(s)].subm2 =
            make_block(subm_kind, stage + ".subm2", c, c, 1, subm_ratio);
        c_prev = c;
    }
    return bb;
}

namespace {

const char* kind_name(Block::Kind k) {
    switch (k) {
        case Block::Kind::subm: return "subm";
        case Block::Kind::regular: return "regular";
        case Block::Kind::spss: return "spss";
        case Block::Kind::sprs: return "sprs";
    }
    return "?";
}

LayerStats run_block(const Block& blk, SelectionStrategy::Kind strategy_kind, SparseTensor& cur) {
    LayerStats ls;
    ls.name = blk.name;
    ls.kind = kind_name(blk.kind);
    SelectionStrategy strategy{strategy_kind, blk.strategy_seed};

    switch (blk.kind) {
        case Block::Kind::subm: {
            const Rulebook rb = build_subm_rulebook(cur, blk.spec);
            SparseTensor y = apply_rulebook(cur, rb, blk.w);
            ls.flops = flops_of(rb, blk.w.c_in, blk.w.c_out);
            ls.convolved = y.size();
            cur = std::move(y);
            break;
        }
        case Block::Kind::regular: {
            const Rulebook rb = build_regular_rulebook(cur, blk.spec);
            SparseTensor y = apply_rulebook(cur, rb, blk.w);
            ls.flops = flops_of(rb, blk.w.c_in, blk.w.c_out);
            ls.convolved = y.size();
            cur = std::move(y);
            break;
        }
        case Block::Kind::spss: {
            SpssResult r = spss_conv_detail(cur, blk.spec, blk.w, blk.ratio, strategy);
            ls.flops = r.flops;
            ls.convolved = r.convolved;
            ls.skipped = r.skipped;
            cur = std::move(r.out);
            break;
        }
        case Block::Kind::sprs: {
            SprsResult r = sprs_conv_detail(cur, blk.spec, blk.w, blk.ratio, strategy);
            ls.flops = r.flops;
            ls.convolved = r.out_positions;
            ls.skipped = r.suppressed;
            cur = std::move(r.out);
            break;
        }
    }
    affine_relu_inplace(cur, blk.w);
    ls.voxels_out = cur.size();
    return ls;
}

}  // namespace

ForwardResult forward(const Backbone& bb, const SparseTensor& input,
                      std::vector<SparseTensor>* stage_outputs) {
    validate_tensor(input);
    if (input.channels != bb.cfg.in_channels)
        throw shape_error("input has " + std::to_string(input.channels) +
                          " channels, backbone expects " + std::to_string(bb.cfg.in_channels));

    ForwardResult fr;
    if (stage_outputs) stage_outputs->clear();

    SparseTensor cur = input;

    StageStats stem_stats;
    stem_stats.name = "stem";
    stem_stats.layers.push_back(run_block(bb.stem, bb.cfg.strategy, cur));
    stem_stats.active_voxel_count = cur.size();
    stem_stats.conv_flops = stem_stats.layers[0].flops;
    stem_stats.positions_convolved = stem_stats.layers[0].convolved;
    stem_stats.positions_skipped = stem_stats.layers[0].skipped;
    fr.stats.push_back(std::move(stem_stats));
    if (stage_outputs) stage_outputs->push_back(cur);

    for (size_t s = 0; s < bb.stages.size(); ++s) {
        const auto& stage = bb.stages[s];
        StageStats st;
        st.name = "stage" + std::to_string(s + 1);
        st.layers.push_back(run_block(stage.down, bb.cfg.strategy, cur));
        st.active_voxel_count = cur.size();
        st.layers.push_back(run_block(stage.subm1, bb.cfg.strategy, cur));
        st.layers.push_back(run_block(stage.subm2, bb.cfg.strategy, cur));
        for (const LayerStats& ls : st.layers) st.conv_flops += ls.flops;
        // The two submanifold layers share one voxel set and ratio, so their
        // partition sizes agree; report that split for the stage.
        st.positions_convolved = st.layers[1].convolved;
        st.positions_skipped = st.layers[1].skipped;
        fr.stats.push_back(std::move(st));
        if (stage_outputs) stage_outputs->push_back(cur);
    }

    for (const StageStats& st : fr.stats) fr.total_conv_flops += st.conv_flops;
    fr.out = std::move(cur);
    return fr;
}

}  // namespace spsconv
