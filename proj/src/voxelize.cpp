#include "spsconv/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spsconv {

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw io_error("cannot open for reading: " + path);
    return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw io_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

PointCloud read_points(const std::string& path) {
    if (has_suffix(path, ".txt")) return read_points_txt(path);
    if (has_suffix(path, ".bin")) return read_points_bin(path);
    throw io_error("unknown point file extension (expected .txt or .bin): " + path);
}

PointCloud read_points_txt(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::in);
    PointCloud pc;
    pc.channels = 0;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty()) continue;  // blank line
        if (!ss.eof())
            throw io_error(path + ":" + std::to_string(lineno) + ": non-numeric field");
        if (vals.size() < 4)
            throw io_error(path + ":" + std::to_string(lineno) +
                           ": expected at least x y z and one feature");
        int32_t c = int32_t(vals.size()) - 3;
        if (pc.channels == 0)
            pc.channels = c;
        else if (c != pc.channels)
            throw io_error(path + ":" + std::to_string(lineno) + ": feature count changed from " +
                           std::to_string(pc.channels) + " to " + std::to_string(c));
        pc.xyz.insert(pc.xyz.end(), {vals[0], vals[1], vals[2]});
        for (int32_t i = 0; i < c; ++i) pc.features.push_back(float(vals[3 + i]));
    }
    if (pc.channels == 0) pc.channels = 1;  // empty file: intensity-shaped
    return pc;
}

PointCloud read_points_bin(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    in.seekg(0, std::ios::end);
    const auto bytes = int64_t(in.tellg());
    in.seekg(0, std::ios::beg);
    if (bytes % 16 != 0)
        throw io_error(path + ": size is not a multiple of 16-byte (x,y,z,intensity) records");
    const int64_t n = bytes / 16;
    std::vector<float> raw(size_t(n) * 4);
    in.read(reinterpret_cast<char*>(raw.data()), bytes);
    if (!in) throw io_error(path + ": short read");

    PointCloud pc;
    pc.channels = 1;
    pc.xyz.reserve(size_t(n) * 3);
    pc.features.reserve(size_t(n));
    for (int64_t i = 0; i < n; ++i) {
        pc.xyz.insert(pc.xyz.end(), {double(raw[i * 4 + 0]), double(raw[i * 4 + 1]),
                                     double(raw[i * 4 + 2])});
        pc.features.push_back(raw[i * 4 + 3]);
    }
    return pc;
}

void write_points_txt(const PointCloud& pc, const std::string& path) {
    std::ofstream out = open_out(path, std::ios::out);
    char buf[64];
    for (int64_t i = 0; i < pc.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            std::snprintf(buf, sizeof buf, "%.6f", pc.xyz[i * 3 + a]);
            out << buf << ' ';
        }
        for (int32_t c = 0; c < pc.channels; ++c) {
            std::snprintf(buf, sizeof buf, "%.6f", double(pc.features[i * pc.channels + c]));
            out << buf << (c + 1 < pc.channels ? " " : "");
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

void write_points_bin(const PointCloud& pc, const std::string& path) {
    if (pc.channels != 1)
        throw io_error("binary point files hold exactly one feature channel, got " +
                       std::to_string(pc.channels));
    std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
    for (int64_t i = 0; i < pc.size(); ++i) {
        float rec[4] = {float(pc.xyz[i * 3 + 0]), float(pc.xyz[i * 3 + 1]),
                        float(pc.xyz[i * 3 + 2]), pc.features[i]};
        out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
    if (!out) throw io_error("write failed: " + path);
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::in);
    std::vector<int> labels;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        int v;
        if (!(ss >> v)) {
            std::string rest;
            if (ss.clear(), !(ss >> rest))
                continue;  // blank line
            throw io_error(path + ":" + std::to_string(lineno) + ": expected 0 or 1");
        }
        if (v != 0 && v != 1)
            throw io_error(path + ":" + std::to_string(lineno) + ": expected 0 or 1");
        labels.push_back(v);
    }
    return labels;
}

void write_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out = open_out(path, std::ios::out);
    for (int v : labels) out << v << '\n';
    if (!out) throw io_error("write failed: " + path);
}

SparseTensor voxelize(const PointCloud& pc, const VoxelGridSpec& grid) {
    grid.validate();
    if (pc.channels < 1) throw shape_error("point cloud needs at least one feature channel");

    struct Cell {
        std::vector<double> sum;
        int64_t count = 0;
    };
    std::unordered_map<Coord, Cell, CoordHash> cells;
    cells.reserve(size_t(pc.size()));

    for (int64_t i = 0; i < pc.size(); ++i) {
        Coord c{0, 0, 0, 0};
        bool inside = true;
        int32_t cell[3];
        for (int a = 0; a < 3; ++a) {
            const double f = std::floor((pc.xyz[i * 3 + a] - grid.origin[a]) / grid.voxel_size[a]);
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
        Cell& slot = cells[c];
        if (slot.sum.empty()) slot.sum.assign(size_t(pc.channels), 0.0);
        for (int32_t ch = 0; ch < pc.channels; ++ch)
            slot.sum[ch] += double(pc.features[i * pc.channels + ch]);
        slot.count += 1;
    }

    std::vector<Coord> coords;
    coords.reserve(cells.size());
    for (const auto& [c, _] : cells) coords.push_back(c);
    std::sort(coords.begin(), coords.end(), canonical_less);

    SparseTensor t;
    t.channels = pc.channels;
    t.spatial_shape = grid.shape;
    t.stride_level = {1, 1, 1};
    t.coords = coords;
    t.features.resize(coords.size() * size_t(pc.channels));
    for (size_t i = 0; i < coords.size(); ++i) {
        const Cell& slot = cells.at(coords[i]);
        for (int32_t ch = 0; ch < pc.channels; ++ch)
            t.features[i * size_t(pc.channels) + ch] = float(slot.sum[ch] / double(slot.count));
    }
    return t;
}

}  // namespace spsconv
