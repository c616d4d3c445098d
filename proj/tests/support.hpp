#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dfsim/config.hpp"

namespace dfsim::testing {

// Desk-scale (p=2, a=4, h=2) configuration with optional overrides.
inline RunConfig desk(const std::string& routing, const std::string& pattern, double load, std::uint64_t seed = 1,
                      const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  ConfigMap map;
  map.apply_preset("desk-72");
  map.set("routing", routing);
  map.set("pattern", pattern);
  map.set("load", format_double(load));
  map.set("seed", std::to_string(seed));
  for (const auto& [key, value] : extra) map.set(key, value);
  return resolve(map);
}

}  // namespace dfsim::testing
