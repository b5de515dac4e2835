#include "spsconv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace spsconv {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("key '" + key + "': expected a number, got '" + text + "'");
    }
}

int64_t parse_int(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("key '" + key + "': expected an integer, got '" + text + "'");
    }
}

// The documented key set. Anything else in a config file is a typo.
const char* kKnownKeys[] = {
    "origin", "voxel_size", "shape",
    "in_channels", "stem_channels", "stage_channels", "stage_strides",
    "subm_ratios", "down_ratios", "kernel_size", "mode", "strategy", "seed",
    "n_background", "n_foreground_clusters", "cluster_size", "foreground_feature_scale",
};

}  // namespace

KvMap parse_config_text(const std::string& text, const std::string& origin) {
    KvMap kv;
    std::istringstream in(text);
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw config_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                               key + "'");
    }
    return kv;
}

KvMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

void reject_unknown_keys(const KvMap& kv) {
    for (const auto& [key, _] : kv) {
        bool known = false;
        for (const char* k : kKnownKeys) known = known || key == k;
        if (!known) throw config_error("unknown config key '" + key + "'");
    }
}

int64_t kv_int(const KvMap& kv, const std::string& key, int64_t fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_int(key, it->second);
}

uint64_t kv_uint(const KvMap& kv, const std::string& key, uint64_t fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("key '" + key + "': expected an unsigned integer, got '" + it->second +
                           "'");
    }
}

double kv_double(const KvMap& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_double(key, it->second);
}

std::string kv_string(const KvMap& kv, const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::vector<double> kv_doubles(const KvMap& kv, const std::string& key, size_t n,
                               const std::vector<double>& fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const auto parts = split_commas(it->second);
    if (parts.size() != n)
        throw config_error("key '" + key + "': expected " + std::to_string(n) +
                           " comma-separated values, got " + std::to_string(parts.size()));
    std::vector<double> vals;
    for (const auto& p : parts) vals.push_back(parse_double(key, p));
    return vals;
}

std::vector<int32_t> kv_ints(const KvMap& kv, const std::string& key, size_t n,
                             const std::vector<int32_t>& fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const auto parts = split_commas(it->second);
    if (parts.size() != n)
        throw config_error("key '" + key + "': expected " + std::to_string(n) +
                           " comma-separated values, got " + std::to_string(parts.size()));
    std::vector<int32_t> vals;
    for (const auto& p : parts) vals.push_back(int32_t(parse_int(key, p)));
    return vals;
}

VoxelGridSpec grid_from_config(const KvMap& kv) {
    if (!kv.count("shape")) throw config_error("missing required key 'shape'");
    VoxelGridSpec grid;
    const auto origin = kv_doubles(kv, "origin", 3, {0.0, 0.0, 0.0});
    const auto vs = kv_doubles(kv, "voxel_size", 3, {0.1, 0.1, 0.1});
    const auto shape = kv_ints(kv, "shape", 3, {});
    for (int a = 0; a < 3; ++a) {
        grid.origin[size_t(a)] = origin[size_t(a)];
        grid.voxel_size[size_t(a)] = vs[size_t(a)];
        grid.shape[size_t(a)] = shape[size_t(a)];
    }
    grid.validate();
    return grid;
}

BackboneConfig backbone_from_config(const KvMap& kv) {
    BackboneConfig cfg;
    cfg.in_channels = int32_t(kv_int(kv, "in_channels", cfg.in_channels));
    cfg.stem_channels = int32_t(kv_int(kv, "stem_channels", cfg.stem_channels));
    const auto ch = kv_ints(kv, "stage_channels", 4, {16, 32, 64, 128});
    const auto st = kv_ints(kv, "stage_strides", 4, {1, 2, 2, 2});
    const auto sr = kv_doubles(kv, "subm_ratios", 4, {0.0, 0.0, 0.0, 0.0});
    const auto dr = kv_doubles(kv, "down_ratios", 3, {0.0, 0.0, 0.0});
    std::copy_n(ch.begin(), 4, cfg.stage_channels.begin());
    std::copy_n(st.begin(), 4, cfg.stage_strides.begin());
    std::copy_n(sr.begin(), 4, cfg.subm_ratios.begin());
    std::copy_n(dr.begin(), 3, cfg.down_ratios.begin());
    cfg.kernel_size = int32_t(kv_int(kv, "kernel_size", cfg.kernel_size));

    const std::string mode = kv_string(kv, "mode", "baseline");
    if (mode == "baseline")
        cfg.mode = BackboneConfig::Mode::baseline;
    else if (mode == "pruned")
        cfg.mode = BackboneConfig::Mode::pruned;
    else
        throw config_error("key 'mode': expected 'baseline' or 'pruned', got '" + mode + "'");

    cfg.strategy = strategy_from_string(kv_string(kv, "strategy", "magnitude"));
    cfg.seed = kv_uint(kv, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

SceneSpec scene_from_config(const KvMap& kv) {
    SceneSpec spec;
    spec.grid = grid_from_config(kv);
    spec.n_background = kv_int(kv, "n_background", spec.n_background);
    spec.n_foreground_clusters =
        int32_t(kv_int(kv, "n_foreground_clusters", spec.n_foreground_clusters));
    spec.cluster_size = int32_t(kv_int(kv, "cluster_size", spec.cluster_size));
    spec.foreground_feature_scale =
        kv_double(kv, "foreground_feature_scale", spec.foreground_feature_scale);
    spec.seed = kv_uint(kv, "seed", spec.seed);
    // Geometry fit is checked by synth_scene; parsing a config whose scene
    // defaults would not fit this grid must not fail the other commands.
    return spec;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string join_ints(const std::vector<int32_t>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

}  // namespace

KvMap resolved_config(const KvMap& kv) {
    reject_unknown_keys(kv);
    const VoxelGridSpec grid = grid_from_config(kv);
    const BackboneConfig bb = backbone_from_config(kv);
    const SceneSpec scene = scene_from_config(kv);

    KvMap out;
    out["origin"] = join_doubles({grid.origin[0], grid.origin[1], grid.origin[2]});
    out["voxel_size"] = join_doubles({grid.voxel_size[0], grid.voxel_size[1], grid.voxel_size[2]});
    out["shape"] = join_ints({grid.shape[0], grid.shape[1], grid.shape[2]});
    out["in_channels"] = std::to_string(bb.in_channels);
    out["stem_channels"] = std::to_string(bb.stem_channels);
    out["stage_channels"] = join_ints({bb.stage_channels.begin(), bb.stage_channels.end()});
    out["stage_strides"] = join_ints({bb.stage_strides.begin(), bb.stage_strides.end()});
    out["subm_ratios"] = join_doubles({bb.subm_ratios.begin(), bb.subm_ratios.end()});
    out["down_ratios"] = join_doubles({bb.down_ratios.begin(), bb.down_ratios.end()});
    out["kernel_size"] = std::to_string(bb.kernel_size);
    out["mode"] = bb.mode == BackboneConfig::Mode::pruned ? "pruned" : "baseline";
    out["strategy"] = strategy_name(bb.strategy);
    out["seed"] = std::to_string(bb.seed);
    out["n_background"] = std::to_string(scene.n_background);
    out["n_foreground_clusters"] = std::to_string(scene.n_foreground_clusters);
    out["cluster_size"] = std::to_string(scene.cluster_size);
    out["foreground_feature_scale"] = format_double(scene.foreground_feature_scale);
    return out;
}

}  // namespace spsconv
