#include "spsconv/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace spsconv {

MagnitudeScores magnitude_map(const float* features, int64_t n, int32_t channels) {
    if (channels < 1) throw shape_error("magnitude map needs at least one channel");
    MagnitudeScores s;
    s.g.resize(size_t(n));
    s.m.resize(size_t(n));
    // Values saturate toward 1 for huge magnitudes; clamp below 1 so the
    // mask stays a strict re-weighting.
    const float below_one = std::nextafter(1.0f, 0.0f);
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int32_t c = 0; c < channels; ++c) acc += std::fabs(double(features[i * channels + c]));
        const double g = acc / double(channels);
        s.g[size_t(i)] = float(g);
        s.m[size_t(i)] = std::min(float(1.0 / (1.0 + std::exp(-g))), below_one);
    }
    return s;
}

MagnitudeScores magnitude_map(const SparseTensor& t) {
    validate_tensor(t);
    return magnitude_map(t.features.data(), t.size(), t.channels);
}

SelectionStrategy::Kind strategy_from_string(const std::string& name) {
    if (name == "magnitude") return SelectionStrategy::Kind::magnitude;
    if (name == "random") return SelectionStrategy::Kind::random;
    if (name == "inverse") return SelectionStrategy::Kind::inverse;
    throw config_error("unknown selection strategy: " + name);
}

const char* strategy_name(SelectionStrategy::Kind kind) {
    switch (kind) {
        case SelectionStrategy::Kind::magnitude: return "magnitude";
        case SelectionStrategy::Kind::random: return "random";
        case SelectionStrategy::Kind::inverse: return "inverse";
    }
    return "?";
}

int64_t unimportant_count(double ratio, int64_t n) {
    // Ratios arrive as short decimals; nudge the product so 0.3 * 10 and
    // 0.7 * 10 floor to 3 and 7 despite binary rounding. The nudge is far
    // below one row for every realistic n.
    const double nudged = ratio * double(n) + 1e-9 * double(n) + 1e-12;
    return std::min<int64_t>(n, int64_t(std::floor(nudged)));
}

Partition partition(const MagnitudeScores& scores, double ratio,
                    const SelectionStrategy& strategy) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw config_error("pruning ratio must lie in [0, 1]");
    const int64_t n = int64_t(scores.g.size());
    const int64_t n_nim = unimportant_count(ratio, n);
    const int64_t n_im = n - n_nim;

    Partition part;
    part.ratio = ratio;

    std::vector<int32_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    switch (strategy.kind) {
        case SelectionStrategy::Kind::magnitude:
        case SelectionStrategy::Kind::inverse: {
            // One ranking serves both: g descending, ties to the lower row.
            // magnitude keeps its prefix, inverse drops the same prefix, so
            // the k-th row magnitude admits is the k-th row inverse excludes.
            std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
                if (scores.g[size_t(a)] != scores.g[size_t(b)])
                    return scores.g[size_t(a)] > scores.g[size_t(b)];
                return a < b;
            });
            const bool keep_top = strategy.kind == SelectionStrategy::Kind::magnitude;
            const int64_t cut = keep_top ? n_im : n_nim;
            for (int64_t i = 0; i < n; ++i) {
                const bool in_prefix = i < cut;
                const bool important = keep_top ? in_prefix : !in_prefix;
                (important ? part.im : part.nim).push_back(order[size_t(i)]);
            }
            break;
        }
        case SelectionStrategy::Kind::random: {
            std::mt19937_64 rng(strategy.seed);
            // Partial Fisher-Yates; uniform without std::uniform_int_distribution
            // so the draw is byte-reproducible everywhere.
            for (int64_t i = 0; i < n_im; ++i) {
                const uint64_t span = uint64_t(n - i);
                const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
                uint64_t r;
                do {
                    r = rng();
                } while (r >= limit);
                std::swap(order[size_t(i)], order[size_t(i + int64_t(r % span))]);
            }
            part.im.assign(order.begin(), order.begin() + n_im);
            part.nim.assign(order.begin() + n_im, order.end());
            break;
        }
    }
    std::sort(part.im.begin(), part.im.end());
    std::sort(part.nim.begin(), part.nim.end());
    return part;
}

SparseTensor mask_reweight(const SparseTensor& t, const MagnitudeScores& scores) {
    if (scores.m.size() != size_t(t.size()))
        throw shape_error("mask size does not match tensor rows");
    SparseTensor out = t;
    for (int64_t i = 0; i < out.size(); ++i) {
        const float m = scores.m[size_t(i)];
        float* row = out.row(i);
        for (int32_t c = 0; c < out.channels; ++c) row[c] *= m;
    }
    return out;
}

std::vector<bool> stride_mask(const std::vector<Coord>& coords,
                              const std::array<int32_t, 3>& stride) {
    for (int a = 0; a < 3; ++a)
        if (stride[a] < 1) throw std::invalid_argument("stride must be >= 1 on every axis");
    std::vector<bool> mask(coords.size());
    for (size_t i = 0; i < coords.size(); ++i) {
        const Coord& p = coords[i];
        if (p.x < 0 || p.y < 0 || p.z < 0)
            throw std::domain_error("stride mask is defined for non-negative coordinates");
        mask[i] = (p.x % stride[0]) + (p.y % stride[1]) + (p.z % stride[2]) == 0;
    }
    return mask;
}

std::vector<Coord> dilate_positions(const std::vector<Coord>& p_im, const KernelSpec& spec,
                                    const std::array<int32_t, 3>& spatial_shape) {
    const auto offsets = kernel_offsets(spec);
    std::vector<Coord> out;
    out.reserve(p_im.size() * offsets.size());
    for (const Coord& p : p_im) {
        for (const auto& d : offsets) {
            const Coord q{p.b, p.x + d[0], p.y + d[1], p.z + d[2]};
            if (q.x < 0 || q.x >= spatial_shape[0] || q.y < 0 || q.y >= spatial_shape[1] ||
                q.z < 0 || q.z >= spatial_shape[2])
                continue;
            out.push_back(q);
        }
    }
    std::sort(out.begin(), out.end(), canonical_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Coord> sprs_output_positions(const Partition& part, const std::vector<Coord>& coords,
                                         const KernelSpec& spec,
                                         const std::array<int32_t, 3>& spatial_shape) {
    spec.validate();
    const auto& s = spec.stride;
    const auto out_shape = ceil_div(spatial_shape, s);

    std::vector<Coord> im_coords;
    im_coords.reserve(part.im.size());
    for (int32_t r : part.im) im_coords.push_back(coords.at(size_t(r)));

    std::vector<Coord> survivors = dilate_positions(im_coords, spec, spatial_shape);
    {
        const std::vector<bool> keep = stride_mask(survivors, s);
        size_t w = 0;
        for (size_t i = 0; i < survivors.size(); ++i)
            if (keep[i]) survivors[w++] = survivors[i];
        survivors.resize(w);
    }
    std::vector<Coord> nim_coords;
    nim_coords.reserve(part.nim.size());
    for (int32_t r : part.nim) nim_coords.push_back(coords.at(size_t(r)));
    {
        const std::vector<bool> keep = stride_mask(nim_coords, s);
        for (size_t i = 0; i < nim_coords.size(); ++i)
            if (keep[i]) survivors.push_back(nim_coords[i]);
    }

    std::vector<Coord> out;
    out.reserve(survivors.size());
    for (const Coord& q : survivors) {
        const Coord j{q.b, q.x / s[0], q.y / s[1], q.z / s[2]};
        if (j.x >= out_shape[0] || j.y >= out_shape[1] || j.z >= out_shape[2]) continue;
        out.push_back(j);
    }
    std::sort(out.begin(), out.end(), canonical_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SpssResult spss_conv_detail(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                            double ratio, const SelectionStrategy& strategy) {
    spec.validate();
    if (!spec.unit_stride())
        throw std::invalid_argument("pruned submanifold convolution requires unit stride");
    if (w.c_in != w.c_out)
        throw config_error("pruned submanifold convolution requires c_in == c_out (the skip "
                           "branch forwards features unchanged)");

    const MagnitudeScores scores = magnitude_map(t);
    const Partition part = partition(scores, ratio, strategy);
    const SparseTensor masked = mask_reweight(t, scores);

    const Rulebook rb = build_subm_rulebook(t, spec, &part.im);

    SpssResult res;
    res.out = apply_rulebook(masked, rb, w);
    for (int32_t r : part.nim)
        std::copy_n(masked.row(r), masked.channels, res.out.row(r));
    res.flops = flops_of(rb, w.c_in, w.c_out);
    res.convolved = int64_t(part.im.size());
    res.skipped = int64_t(part.nim.size());
    return res;
}

SparseTensor spss_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                       double ratio, const SelectionStrategy& strategy) {
    return spss_conv_detail(t, spec, w, ratio, strategy).out;
}

SprsResult sprs_conv_detail(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                            double ratio, const SelectionStrategy& strategy) {
    spec.validate();
    const MagnitudeScores scores = magnitude_map(t);
    const Partition part = partition(scores, ratio, strategy);
    const std::vector<Coord> allowed = sprs_output_positions(part, t.coords, spec, t.spatial_shape);

    const Rulebook rb = build_regular_rulebook(t, spec, &allowed);

    SprsResult res;
    res.out = apply_rulebook(t, rb, w);  // positional pruning only, no re-weighting
    res.flops = flops_of(rb, w.c_in, w.c_out);
    res.out_positions = int64_t(rb.out_coords.size());
    res.suppressed = rb.candidate_count - res.out_positions;
    return res;
}

SparseTensor sprs_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                       double ratio, const SelectionStrategy& strategy) {
    return sprs_conv_detail(t, spec, w, ratio, strategy).out;
}

}  // namespace spsconv
