#include "spsconv/conv.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace spsconv {

void ConvWeights::validate() const {
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw shape_error("weight kernel size must be positive and odd");
    if (c_in < 1 || c_out < 1) throw shape_error("weight channel counts must be positive");
    const int64_t k3 = int64_t(kernel_size) * kernel_size * kernel_size;
    if (int64_t(data.size()) != k3 * c_in * c_out)
        throw shape_error("weight buffer size does not match kernel_size^3 * c_in * c_out");
    if (gamma.size() != beta.size())
        throw shape_error("affine gamma and beta must both be present or both absent");
    if (!gamma.empty() && int64_t(gamma.size()) != c_out)
        throw shape_error("affine parameter size does not match c_out");
}

ConvWeights ConvWeights::filled(int32_t k, int32_t c_in, int32_t c_out, float value) {
    ConvWeights w;
    w.kernel_size = k;
    w.c_in = c_in;
    w.c_out = c_out;
    w.data.assign(size_t(int64_t(k) * k * k * c_in * c_out), value);
    w.validate();
    return w;
}

ConvWeights ConvWeights::identity(int32_t c) {
    ConvWeights w = filled(1, c, c, 0.0f);
    for (int32_t i = 0; i < c; ++i) w.at(0, i, i) = 1.0f;
    return w;
}

ConvWeights ConvWeights::seeded_uniform(int32_t k, int32_t c_in, int32_t c_out, uint64_t seed) {
    ConvWeights w = filled(k, c_in, c_out, 0.0f);
    const double a = std::sqrt(1.0 / (double(k) * k * k * c_in));
    std::mt19937_64 rng(seed);
    // Map raw 64-bit draws to [0,1) ourselves: std::uniform_real_distribution
    // is implementation-defined and would break byte-reproducibility.
    for (float& v : w.data) {
        const double u = double(rng() >> 11) * 0x1.0p-53;
        v = float((2.0 * u - 1.0) * a);
    }
    w.gamma.assign(size_t(c_out), 1.0f);
    w.beta.assign(size_t(c_out), 0.0f);
    return w;
}

namespace {

constexpr char kMagic[4] = {'S', 'P', 'S', 'W'};

template <typename T>
void write_raw(std::ofstream& out, const T* p, size_t n) {
    out.write(reinterpret_cast<const char*>(p), std::streamsize(n * sizeof(T)));
}

template <typename T>
void read_raw(std::ifstream& in, T* p, size_t n) {
    in.read(reinterpret_cast<char*>(p), std::streamsize(n * sizeof(T)));
}

}  // namespace

void save_weights(const ConvWeights& w, const std::string& path) {
    w.validate();
    std::ofstream out(path, std::ios::out | std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path);
    out.write(kMagic, 4);
    const uint32_t header[3] = {uint32_t(w.kernel_size), uint32_t(w.c_in), uint32_t(w.c_out)};
    write_raw(out, header, 3);
    write_raw(out, w.data.data(), w.data.size());
    if (w.has_affine()) {
        write_raw(out, w.gamma.data(), w.gamma.size());
        write_raw(out, w.beta.data(), w.beta.size());
    }
    if (!out) throw io_error("write failed: " + path);
}

ConvWeights load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::in | std::ios::binary);
    if (!in) throw io_error("cannot open for reading: " + path);
    in.seekg(0, std::ios::end);
    const int64_t bytes = int64_t(in.tellg());
    in.seekg(0, std::ios::beg);

    char magic[4];
    uint32_t header[3];
    if (bytes < 16) throw io_error(path + ": truncated weight file");
    read_raw(in, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw io_error(path + ": bad weight file magic");
    read_raw(in, header, 3);

    ConvWeights w;
    w.kernel_size = int32_t(header[0]);
    w.c_in = int32_t(header[1]);
    w.c_out = int32_t(header[2]);
    const int64_t k3 = int64_t(w.kernel_size) * w.kernel_size * w.kernel_size;
    const int64_t n_weights = k3 * w.c_in * w.c_out;
    const int64_t body = bytes - 16;
    if (body == n_weights * 4) {
        w.data.resize(size_t(n_weights));
    } else if (body == (n_weights + 2 * int64_t(w.c_out)) * 4) {
        w.data.resize(size_t(n_weights));
        w.gamma.resize(size_t(w.c_out));
        w.beta.resize(size_t(w.c_out));
    } else {
        throw io_error(path + ": weight file size does not match its header");
    }
    read_raw(in, w.data.data(), w.data.size());
    if (!w.gamma.empty()) {
        read_raw(in, w.gamma.data(), w.gamma.size());
        read_raw(in, w.beta.data(), w.beta.size());
    }
    if (!in) throw io_error(path + ": short read");
    w.validate();
    return w;
}

SparseTensor apply_rulebook(const SparseTensor& x, const Rulebook& rb, const ConvWeights& w) {
    w.validate();
    validate_tensor(x);
    if (x.channels != w.c_in)
        throw shape_error("input has " + std::to_string(x.channels) + " channels, weights expect " +
                          std::to_string(w.c_in));
    if (int64_t(rb.offsets.size()) != int64_t(w.kernel_size) * w.kernel_size * w.kernel_size)
        throw shape_error("rulebook offset count does not match weight kernel size");

    SparseTensor out;
    out.channels = w.c_out;
    out.coords = rb.out_coords;
    out.features.assign(rb.out_coords.size() * size_t(w.c_out), 0.0f);
    out.spatial_shape = rb.out_spatial_shape;
    for (int a = 0; a < 3; ++a) out.stride_level[a] = x.stride_level[a] * rb.stride[a];

    const int32_t cin = w.c_in, cout = w.c_out;
    const int64_t n_in = x.size(), n_out = out.size();
    for (size_t k = 0; k < rb.pairs.size(); ++k) {
        const float* wk = w.data.data() + int64_t(k) * cin * cout;
        for (const auto& [in_row, out_row] : rb.pairs[k]) {
            if (in_row < 0 || in_row >= n_in || out_row < 0 || out_row >= n_out)
                throw shape_error("rulebook row out of range");
            const float* xi = x.row(in_row);
            float* yo = out.row(out_row);
            for (int32_t ci = 0; ci < cin; ++ci) {
                const float xv = xi[ci];
                const float* wrow = wk + int64_t(ci) * cout;
                for (int32_t co = 0; co < cout; ++co) yo[co] += xv * wrow[co];
            }
        }
    }
    return out;
}

SparseTensor subm_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w) {
    const Rulebook rb = build_subm_rulebook(t, spec);
    return apply_rulebook(t, rb, w);
}

SparseTensor regular_conv(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w) {
    const Rulebook rb = build_regular_rulebook(t, spec);
    return apply_rulebook(t, rb, w);
}

void affine_relu_inplace(SparseTensor& t, const ConvWeights& w) {
    if (!w.has_affine()) throw config_error("block weights carry no affine parameters");
    if (t.channels != w.c_out) throw shape_error("affine channel count does not match tensor");
    for (int64_t i = 0; i < t.size(); ++i) {
        float* row = t.row(i);
        for (int32_t c = 0; c < t.channels; ++c)
            row[c] = std::max(0.0f, w.gamma[c] * row[c] + w.beta[c]);
    }
}

SparseTensor block_forward(const SparseTensor& t, const KernelSpec& spec, const ConvWeights& w,
                           ConvMode mode) {
    if (mode == ConvMode::automatic)
        mode = spec.unit_stride() ? ConvMode::submanifold : ConvMode::regular;
    SparseTensor y =
        mode == ConvMode::submanifold ? subm_conv(t, spec, w) : regular_conv(t, spec, w);
    affine_relu_inplace(y, w);
    return y;
}

}  // namespace spsconv
