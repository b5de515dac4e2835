#pragma once

#include <string>
#include <vector>

#include "spsconv/backbone.hpp"
#include "spsconv/config.hpp"
#include "spsconv/voxelize.hpp"

namespace spsconv {

// Report builders behind the CLI subcommands. Everything here is
// deterministic: identical config + input produce byte-identical text.

// Baseline vs pruned comparison on one voxelized input; JSON text.
std::string run_report_json(const KvMap& kv, const PointCloud& points,
                            const std::string& input_name);

// Pruning-ratio sweep; CSV with one row per ratio and FLOP totals for the
// four substitution variants (none / SPSS-only / SPRS-only / both) plus the
// submanifold-layer share of the SPSS-only variant.
std::string sweep_csv(const KvMap& kv, const PointCloud& points,
                      const std::vector<double>& ratios);

// Foreground fraction at the input and after every stage of a baseline
// backbone. A post-stage voxel counts as foreground when any foreground
// voxel of the previous stage lies in its receptive window (the kernel
// window around its stride anchor); JSON.
std::string stats_report_json(const KvMap& kv, const PointCloud& points,
                              const std::vector<int>& labels, const std::string& input_name,
                              const std::string& labels_name);

// Voxelization summary for one point file; JSON.
std::string voxelize_report_json(const KvMap& kv, const PointCloud& points,
                                 const std::string& input_name);

// Per-variant FLOP totals used by sweep_csv (exposed for tests).
struct SweepRow {
    double ratio = 0.0;
    int64_t baseline = 0;
    int64_t spss = 0;
    int64_t sprs = 0;
    int64_t both = 0;
    int64_t spss_subm = 0;  // submanifold-layer FLOPs inside the SPSS variant
};
SweepRow sweep_point(const BackboneConfig& base_cfg, const SparseTensor& input, double ratio);

}  // namespace spsconv
