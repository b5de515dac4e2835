#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spsconv/backbone.hpp"
#include "spsconv/core.hpp"
#include "spsconv/scene.hpp"

namespace spsconv {

// Flat "key = value" text configuration; '#' starts a comment, blank lines
// are ignored. Keys are unique. The map is ordered so that echoing a
// configuration back into a report is deterministic.
using KvMap = std::map<std::string, std::string>;

KvMap parse_config_text(const std::string& text, const std::string& origin = "<config>");
KvMap parse_config_file(const std::string& path);

// Typed getters; every failure is a config_error naming the key.
int64_t kv_int(const KvMap& kv, const std::string& key, int64_t fallback);
uint64_t kv_uint(const KvMap& kv, const std::string& key, uint64_t fallback);
double kv_double(const KvMap& kv, const std::string& key, double fallback);
std::string kv_string(const KvMap& kv, const std::string& key, const std::string& fallback);
std::vector<double> kv_doubles(const KvMap& kv, const std::string& key, size_t n,
                               const std::vector<double>& fallback);
std::vector<int32_t> kv_ints(const KvMap& kv, const std::string& key, size_t n,
                             const std::vector<int32_t>& fallback);

// Rejects keys outside the documented set (catches typos early).
void reject_unknown_keys(const KvMap& kv);

// Assemble typed configs. grid_from_config requires `shape`; everything else
// has documented defaults.
VoxelGridSpec grid_from_config(const KvMap& kv);
BackboneConfig backbone_from_config(const KvMap& kv);
SceneSpec scene_from_config(const KvMap& kv);

// The full configuration a run resolved to (defaults filled in), as strings
// in the exact format the parser accepts. Reports embed this echo.
KvMap resolved_config(const KvMap& kv);

// Shortest round-trip decimal text for a double (0.3 prints as "0.3").
std::string format_double(double v);

}  // namespace spsconv
