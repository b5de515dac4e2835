#include "spsconv/rulebook.hpp"

#include <algorithm>

namespace spsconv {

void KernelSpec::validate() const {
    if (size < 1 || size % 2 == 0)
        throw std::invalid_argument("kernel size must be positive and odd, got " +
                                    std::to_string(size));
    for (int a = 0; a < 3; ++a)
        if (stride[a] < 1)
            throw std::invalid_argument("stride must be >= 1 on every axis");
}

std::vector<std::array<int32_t, 3>> kernel_offsets(const KernelSpec& spec) {
    spec.validate();
    const int32_t r = (spec.size - 1) / 2;
    std::vector<std::array<int32_t, 3>> offsets;
    offsets.reserve(size_t(spec.volume()));
    for (int32_t dx = -r; dx <= r; ++dx)
        for (int32_t dy = -r; dy <= r; ++dy)
            for (int32_t dz = -r; dz <= r; ++dz) offsets.push_back({dx, dy, dz});
    return offsets;
}

int64_t Rulebook::pair_count() const {
    int64_t n = 0;
    for (const auto& p : pairs) n += int64_t(p.size());
    return n;
}

int64_t flops_of(const Rulebook& rb, int64_t c_in, int64_t c_out) {
    if (c_in < 1 || c_out < 1) throw shape_error("channel counts must be positive");
    return 2 * rb.pair_count() * c_in * c_out;
}

Rulebook build_subm_rulebook(const SparseTensor& t, const KernelSpec& spec,
                             const std::vector<int32_t>* active_out) {
    spec.validate();
    if (!spec.unit_stride())
        throw std::invalid_argument("submanifold convolution requires unit stride");
    validate_tensor(t);

    Rulebook rb;
    rb.mode = Rulebook::Mode::submanifold;
    rb.offsets = kernel_offsets(spec);
    rb.out_coords = t.coords;
    rb.out_spatial_shape = t.spatial_shape;
    rb.stride = {1, 1, 1};
    rb.pairs.resize(rb.offsets.size());

    const CoordIndex index = build_index(t);

    std::vector<int32_t> rows;
    if (active_out) {
        rows = *active_out;
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        for (int32_t r : rows)
            if (r < 0 || r >= t.size())
                throw shape_error("active output row " + std::to_string(r) + " out of range");
    } else {
        rows.resize(size_t(t.size()));
        for (int64_t i = 0; i < t.size(); ++i) rows[size_t(i)] = int32_t(i);
    }

    for (size_t k = 0; k < rb.offsets.size(); ++k) {
        const auto& d = rb.offsets[k];
        auto& bucket = rb.pairs[k];
        for (int32_t out_row : rows) {
            const Coord& p = t.coords[size_t(out_row)];
            const Coord q{p.b, p.x + d[0], p.y + d[1], p.z + d[2]};
            const auto it = index.find(q);
            if (it != index.end()) bucket.emplace_back(it->second, out_row);
        }
    }
    return rb;
}

Rulebook build_regular_rulebook(const SparseTensor& t, const KernelSpec& spec,
                                const std::vector<Coord>* allowed_out) {
    spec.validate();
    validate_tensor(t);
    const auto& s = spec.stride;
    const auto& shape = t.spatial_shape;

    Rulebook rb;
    rb.mode = Rulebook::Mode::regular;
    rb.offsets = kernel_offsets(spec);
    rb.out_spatial_shape = ceil_div(shape, s);
    rb.stride = s;
    rb.pairs.resize(rb.offsets.size());

    // Candidate outputs: stride-aligned members of every kernel window around
    // an active input, expressed in the output frame. Clipping candidates to
    // the input grid is exactly the output-frame bound ceil(shape/stride).
    std::vector<Coord> cands;
    cands.reserve(t.coords.size() * rb.offsets.size() / size_t(s[0] * s[1] * s[2]) + 1);
    for (const Coord& p : t.coords) {
        for (const auto& d : rb.offsets) {
            const int32_t q[3] = {p.x + d[0], p.y + d[1], p.z + d[2]};
            bool keep = true;
            for (int a = 0; a < 3; ++a) {
                if (q[a] < 0 || q[a] >= shape[a] || q[a] % s[a] != 0) {
                    keep = false;
                    break;
                }
            }
            if (keep) cands.push_back({p.b, q[0] / s[0], q[1] / s[1], q[2] / s[2]});
        }
    }
    std::sort(cands.begin(), cands.end(), canonical_less);
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    rb.candidate_count = int64_t(cands.size());

    if (allowed_out) {
        CoordSet allowed(allowed_out->begin(), allowed_out->end());
        std::vector<Coord> kept;
        kept.reserve(cands.size());
        for (const Coord& c : cands)
            if (allowed.count(c)) kept.push_back(c);
        cands = std::move(kept);
    }
    rb.out_coords = std::move(cands);

    const CoordIndex index = build_index(t);
    for (size_t k = 0; k < rb.offsets.size(); ++k) {
        const auto& d = rb.offsets[k];
        auto& bucket = rb.pairs[k];
        for (size_t out_row = 0; out_row < rb.out_coords.size(); ++out_row) {
            const Coord& j = rb.out_coords[out_row];
            const Coord q{j.b, j.x * s[0] + d[0], j.y * s[1] + d[1], j.z * s[2] + d[2]};
            const auto it = index.find(q);
            if (it != index.end()) bucket.emplace_back(it->second, int32_t(out_row));
        }
    }
    return rb;
}

}  // namespace spsconv
