#include "spsconv/harness.hpp"

#include <cmath>

#include "json.hpp"

namespace spsconv {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json layer_json(const LayerStats& ls) {
    ordered_json j;
    j["name"] = ls.name;
    j["kind"] = ls.kind;
    j["voxels_out"] = ls.voxels_out;
    j["flops"] = ls.flops;
    j["positions_convolved"] = ls.convolved;
    j["positions_skipped"] = ls.skipped;
    return j;
}

ordered_json stage_json(const StageStats& st) {
    ordered_json j;
    j["name"] = st.name;
    j["active_voxel_count"] = st.active_voxel_count;
    j["conv_flops"] = st.conv_flops;
    j["positions_convolved"] = st.positions_convolved;
    j["positions_skipped"] = st.positions_skipped;
    ordered_json layers = ordered_json::array();
    for (const LayerStats& ls : st.layers) layers.push_back(layer_json(ls));
    j["layers"] = layers;
    return j;
}

ordered_json forward_json(const ForwardResult& fr) {
    ordered_json j;
    j["total_conv_flops"] = fr.total_conv_flops;
    ordered_json stages = ordered_json::array();
    for (const StageStats& st : fr.stats) stages.push_back(stage_json(st));
    j["stages"] = stages;
    return j;
}

ordered_json config_json(const KvMap& resolved) {
    ordered_json j;
    for (const auto& [k, v] : resolved) j[k] = v;
    return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string run_report_json(const KvMap& kv, const PointCloud& points,
                            const std::string& input_name) {
    const KvMap resolved = resolved_config(kv);
    const VoxelGridSpec grid = grid_from_config(kv);
    const BackboneConfig cfg = backbone_from_config(kv);
    const SparseTensor input = voxelize(points, grid);

    const ForwardResult baseline = forward(build_backbone(cfg, Substitution::none), input);
    const ForwardResult pruned = forward(build_backbone(cfg, Substitution::both), input);

    ordered_json j;
    j["command"] = "run";
    j["input"] = input_name;
    j["config"] = config_json(resolved);
    j["input_points"] = points.size();
    j["input_voxels"] = input.size();
    j["baseline"] = forward_json(baseline);
    j["pruned"] = forward_json(pruned);
    j["flop_reduction"] =
        baseline.total_conv_flops > 0
            ? 1.0 - double(pruned.total_conv_flops) / double(baseline.total_conv_flops)
            : 0.0;
    return dump(j);
}

SweepRow sweep_point(const BackboneConfig& base_cfg, const SparseTensor& input, double ratio) {
    BackboneConfig cfg = base_cfg;
    cfg.subm_ratios = {ratio, ratio, ratio, ratio};
    cfg.down_ratios = {ratio, ratio, ratio};

    SweepRow row;
    row.ratio = ratio;
    row.baseline = forward(build_backbone(cfg, Substitution::none), input).total_conv_flops;

    const ForwardResult spss = forward(build_backbone(cfg, Substitution::spss_only), input);
    row.spss = spss.total_conv_flops;
    for (const StageStats& st : spss.stats)
        for (const LayerStats& ls : st.layers)
            if (ls.kind == "spss") row.spss_subm += ls.flops;

    row.sprs = forward(build_backbone(cfg, Substitution::sprs_only), input).total_conv_flops;
    row.both = forward(build_backbone(cfg, Substitution::both), input).total_conv_flops;
    return row;
}

std::string sweep_csv(const KvMap& kv, const PointCloud& points,
                      const std::vector<double>& ratios) {
    if (ratios.empty()) throw config_error("sweep needs at least one ratio");
    for (double r : ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw config_error("sweep ratios must lie in [0, 1]");
    reject_unknown_keys(kv);
    const VoxelGridSpec grid = grid_from_config(kv);
    const BackboneConfig cfg = backbone_from_config(kv);
    const SparseTensor input = voxelize(points, grid);

    std::string csv = "ratio,baseline_flops,spss_flops,sprs_flops,both_flops,spss_subm_flops\n";
    for (double r : ratios) {
        const SweepRow row = sweep_point(cfg, input, r);
        csv += format_double(row.ratio) + ',' + std::to_string(row.baseline) + ',' +
               std::to_string(row.spss) + ',' + std::to_string(row.sprs) + ',' +
               std::to_string(row.both) + ',' + std::to_string(row.spss_subm) + '\n';
    }
    return csv;
}

std::string stats_report_json(const KvMap& kv, const PointCloud& points,
                              const std::vector<int>& labels, const std::string& input_name,
                              const std::string& labels_name) {
    if (labels.empty()) throw io_error("label file is empty");
    if (int64_t(labels.size()) != points.size())
        throw io_error("label count " + std::to_string(labels.size()) +
                       " does not match point count " + std::to_string(points.size()));
    const KvMap resolved = resolved_config(kv);
    const VoxelGridSpec grid = grid_from_config(kv);
    const BackboneConfig cfg = backbone_from_config(kv);
    const SparseTensor input = voxelize(points, grid);

    // Foreground voxels: any contributing point labelled foreground.
    CoordSet fg;
    for (int64_t i = 0; i < points.size(); ++i) {
        if (!labels[size_t(i)]) continue;
        Coord c{0, 0, 0, 0};
        bool inside = true;
        int32_t cell[3];
        for (int a = 0; a < 3; ++a) {
            const double f =
                std::floor((points.xyz[i * 3 + a] - grid.origin[a]) / grid.voxel_size[a]);
            if (f < 0.0 || f >= double(grid.shape[a])) {
                inside = false;
                break;
            }
            cell[a] = int32_t(f);
        }
        if (!inside) continue;
        c.x = cell[0];
        c.y = cell[1];
        c.z = cell[2];
        fg.insert(c);
    }

    std::vector<SparseTensor> trace;
    const ForwardResult fr = forward(build_backbone(cfg, Substitution::none), input, &trace);

    ordered_json j;
    j["command"] = "stats";
    j["input"] = input_name;
    j["labels"] = labels_name;
    j["config"] = config_json(resolved);
    j["input_points"] = points.size();
    j["input_voxels"] = input.size();
    j["input_foreground_voxels"] = int64_t(fg.size());
    j["input_foreground_fraction"] =
        input.size() > 0 ? double(fg.size()) / double(input.size()) : 0.0;

    // Track labels through the downsampling chain: a stage voxel counts as
    // foreground when any foreground voxel of the previous stage lies in its
    // receptive window, i.e. the kernel window around its stride anchor.
    // Every active output has such a witness, so an all-foreground input
    // stays all-foreground through every stage.
    const auto offsets = kernel_offsets(KernelSpec{cfg.kernel_size, {1, 1, 1}});
    ordered_json stages = ordered_json::array();
    CoordSet cur_fg = fg;
    for (size_t s = 0; s < 4; ++s) {
        const SparseTensor& out = trace.at(s + 1);  // trace[0] is the stem
        const int32_t stride = cfg.stage_strides[s];
        CoordSet out_coords(out.coords.begin(), out.coords.end());
        CoordSet next_fg;
        for (const Coord& p : cur_fg) {
            for (const auto& d : offsets) {
                const int32_t qx = p.x + d[0], qy = p.y + d[1], qz = p.z + d[2];
                if (qx < 0 || qy < 0 || qz < 0) continue;
                if (qx % stride || qy % stride || qz % stride) continue;
                const Coord j{p.b, qx / stride, qy / stride, qz / stride};
                if (out_coords.count(j)) next_fg.insert(j);
            }
        }
        ordered_json sj;
        sj["name"] = "stage" + std::to_string(s + 1);
        sj["voxels"] = out.size();
        sj["foreground_voxels"] = int64_t(next_fg.size());
        sj["foreground_fraction"] =
            out.size() > 0 ? double(next_fg.size()) / double(out.size()) : 0.0;
        stages.push_back(sj);
        cur_fg = std::move(next_fg);
    }
    j["stages"] = stages;
    j["total_conv_flops"] = fr.total_conv_flops;
    return dump(j);
}

std::string voxelize_report_json(const KvMap& kv, const PointCloud& points,
                                 const std::string& input_name) {
    const KvMap resolved = resolved_config(kv);
    const VoxelGridSpec grid = grid_from_config(kv);
    const SparseTensor t = voxelize(points, grid);

    ordered_json j;
    j["command"] = "voxelize";
    j["input"] = input_name;
    j["config"] = config_json(resolved);
    j["input_points"] = points.size();
    j["voxels"] = t.size();
    j["channels"] = t.channels;
    j["spatial_shape"] = {t.spatial_shape[0], t.spatial_shape[1], t.spatial_shape[2]};
    j["stride_level"] = {t.stride_level[0], t.stride_level[1], t.stride_level[2]};
    return dump(j);
}

}  // namespace spsconv
