#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfsim/routing.hpp"
#include "dfsim/router_state.hpp"
#include "dfsim/topology.hpp"
#include "dfsim/traffic.hpp"

namespace dfsim {

// Invalid configuration; `key()` names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// One fully resolved simulation instance.
struct RunConfig {
  DragonflyParams topo;
  RoutingSpec routing;
  TrafficPattern pattern;
  LoadSchedule schedule = LoadSchedule::constant(0.5);
  TimingParams timing;
  std::uint64_t seed = 1;

  TimeNs warmup_ns = 200'000;
  TimeNs measure_ns = 100'000;
  TimeNs t_end_ns = 0;  // 0: warmup + measure
  TimeNs window_ns = 10'000;
  double converge_tol = 0.1;
  int converge_hold = 5;
  TimeNs stall_ns = 50'000;  // watchdog: no departures for this long
  bool drain = false;        // keep running past t_end until empty
  bool audit = false;        // credit audit at every window tick

  bool write_topology = false;
  bool write_packets = false;
  std::vector<TimeNs> qtable_snapshot_ns;
  std::vector<RouterId> qtable_routers;

  TimeNs end_ns() const { return t_end_ns > 0 ? t_end_ns : warmup_ns + measure_ns; }
  double load() const { return schedule.segments().front().load; }
  void validate() const;

  // key=value lines that reproduce this instance, seed included.
  std::string dump() const;
  // FNV-1a over the dump with the seed line removed.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

// Raw key/value settings. A few keys accept lists, which expand into a sweep
// matrix: pattern, load, routing and seed (comma separated; load also
// accepts "lo..hi step s").
class ConfigMap {
 public:
  void set(const std::string& key, const std::string& value);
  // "key=value" as given to --set.
  void set_assignment(const std::string& assignment);
  // Lines of key = value; '#' starts a comment.
  void merge_text(const std::string& text, const std::string& origin = "config");
  void apply_preset(const std::string& name);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> known_keys();
std::vector<std::string> preset_names();

std::vector<double> parse_load_list(const std::string& text);

// Cells in matrix order: pattern, then load, then routing, then seed.
std::vector<RunConfig> expand(const ConfigMap& map);
// Requires single-valued sweep keys.
RunConfig resolve(const ConfigMap& map);

std::string format_double(double v);

}  // namespace dfsim
