#include "dfsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace dfsim {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

long long to_int(const std::string& v) {
  std::size_t used = 0;
  const long long x = std::stoll(v, &used);
  if (used != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
  return x;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  const double x = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("not a number: '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(items[i]);
  }
  return out;
}

struct KeyDef {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = {
      {"p", [](RunConfig& c, const std::string& v) { c.topo.p = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.topo.p); }},
      {"a", [](RunConfig& c, const std::string& v) { c.topo.a = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.topo.a); }},
      {"h", [](RunConfig& c, const std::string& v) { c.topo.h = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.topo.h); }},
      {"routing", [](RunConfig& c, const std::string& v) { c.routing.tag = parse_routing(v); },
       [](const RunConfig& c) { return to_string(c.routing.tag); }},
      {"ugal_bias", [](RunConfig& c, const std::string& v) { c.routing.ugal_bias = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.routing.ugal_bias); }},
      {"maxq", [](RunConfig& c, const std::string& v) { c.routing.maxq = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.routing.maxq); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.routing.hp.alpha = to_double(v); },
       [](const RunConfig& c) { return format_double(c.routing.hp.alpha); }},
      {"beta", [](RunConfig& c, const std::string& v) { c.routing.hp.beta = to_double(v); },
       [](const RunConfig& c) { return format_double(c.routing.hp.beta); }},
      {"epsilon", [](RunConfig& c, const std::string& v) { c.routing.hp.epsilon = to_double(v); },
       [](const RunConfig& c) { return format_double(c.routing.hp.epsilon); }},
      {"q_thld1", [](RunConfig& c, const std::string& v) { c.routing.hp.q_thld1 = to_double(v); },
       [](const RunConfig& c) { return format_double(c.routing.hp.q_thld1); }},
      {"q_thld2", [](RunConfig& c, const std::string& v) { c.routing.hp.q_thld2 = to_double(v); },
       [](const RunConfig& c) { return format_double(c.routing.hp.q_thld2); }},
      {"pattern", [](RunConfig& c, const std::string& v) { c.pattern = TrafficPattern::parse(v); },
       [](const RunConfig& c) { return c.pattern.to_string(); }},
      {"load", [](RunConfig& c, const std::string& v) { c.schedule = LoadSchedule::constant(to_double(v)); },
       [](const RunConfig& c) { return format_double(c.load()); }},
      {"load_schedule", [](RunConfig& c, const std::string& v) { c.schedule = LoadSchedule::parse(v); },
       [](const RunConfig& c) { return c.schedule.to_string(); }},
      {"packet_bytes", [](RunConfig& c, const std::string& v) { c.timing.packet_bytes = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.timing.packet_bytes); }},
      {"link_gbps", [](RunConfig& c, const std::string& v) { c.timing.link_gbytes_per_s = to_double(v); },
       [](const RunConfig& c) { return format_double(c.timing.link_gbytes_per_s); }},
      {"local_latency_ns", [](RunConfig& c, const std::string& v) { c.timing.local_latency_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.timing.local_latency_ns); }},
      {"global_latency_ns", [](RunConfig& c, const std::string& v) { c.timing.global_latency_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.timing.global_latency_ns); }},
      {"host_latency_ns", [](RunConfig& c, const std::string& v) { c.timing.host_latency_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.timing.host_latency_ns); }},
      {"router_latency_ns", [](RunConfig& c, const std::string& v) { c.timing.router_latency_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.timing.router_latency_ns); }},
      {"vc_buffer", [](RunConfig& c, const std::string& v) { c.timing.vc_buffer = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.timing.vc_buffer); }},
      {"output_buffer",
       [](RunConfig& c, const std::string& v) { c.timing.output_buffer = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.timing.output_buffer); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"warmup_ns", [](RunConfig& c, const std::string& v) { c.warmup_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.warmup_ns); }},
      {"measure_ns", [](RunConfig& c, const std::string& v) { c.measure_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.measure_ns); }},
      {"t_end_ns", [](RunConfig& c, const std::string& v) { c.t_end_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.t_end_ns); }},
      {"window_ns", [](RunConfig& c, const std::string& v) { c.window_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.window_ns); }},
      {"converge_tol", [](RunConfig& c, const std::string& v) { c.converge_tol = to_double(v); },
       [](const RunConfig& c) { return format_double(c.converge_tol); }},
      {"converge_hold", [](RunConfig& c, const std::string& v) { c.converge_hold = static_cast<int>(to_int(v)); },
       [](const RunConfig& c) { return std::to_string(c.converge_hold); }},
      {"stall_ns", [](RunConfig& c, const std::string& v) { c.stall_ns = to_int(v); },
       [](const RunConfig& c) { return std::to_string(c.stall_ns); }},
      {"drain", [](RunConfig& c, const std::string& v) { c.drain = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.drain ? "true" : "false"); }},
      {"audit", [](RunConfig& c, const std::string& v) { c.audit = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.audit ? "true" : "false"); }},
      {"write_topology", [](RunConfig& c, const std::string& v) { c.write_topology = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.write_topology ? "true" : "false"); }},
      {"write_packets", [](RunConfig& c, const std::string& v) { c.write_packets = to_bool(v); },
       [](const RunConfig& c) { return std::string(c.write_packets ? "true" : "false"); }},
      {"qtable_snapshot_ns",
       [](RunConfig& c, const std::string& v) {
         c.qtable_snapshot_ns.clear();
         for (const std::string& item : split(v, ',')) {
           if (!item.empty()) c.qtable_snapshot_ns.push_back(to_int(item));
         }
       },
       [](const RunConfig& c) { return join(c.qtable_snapshot_ns); }},
      {"qtable_routers",
       [](RunConfig& c, const std::string& v) {
         c.qtable_routers.clear();
         for (const std::string& item : split(v, ',')) {
           if (!item.empty()) c.qtable_routers.push_back(static_cast<RouterId>(to_int(item)));
         }
       },
       [](const RunConfig& c) { return join(c.qtable_routers); }},
  };
  return defs;
}

const KeyDef& find_key(const std::string& key) {
  for (const KeyDef& d : key_defs()) {
    if (key == d.name) return d;
  }
  throw ConfigError(key, "unknown key");
}

const char* const kSweepKeys[] = {"pattern", "load", "routing", "seed"};

bool is_sweep_key(const std::string& key) {
  return std::find(std::begin(kSweepKeys), std::end(kSweepKeys), key) != std::end(kSweepKeys);
}

std::vector<std::string> sweep_values(const ConfigMap& map, const std::string& key) {
  if (!map.has(key)) return {""};
  if (key == "load") {
    std::vector<std::string> out;
    try {
      for (double v : parse_load_list(map.get(key))) out.push_back(format_double(v));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
    return out;
  }
  std::vector<std::string> out = split(map.get(key), ',');
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

}  // namespace

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const KeyDef& d : key_defs()) out.emplace_back(d.name);
  return out;
}

std::vector<std::string> preset_names() { return {"desk-72", "paper-1056", "paper-2550", "figure5", "figure6"}; }

std::vector<double> parse_load_list(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> out;
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const auto step_at = t.find("step");
    if (step_at == std::string::npos) throw ConfigError("load", "range needs 'step': '" + t + "'");
    const double lo = to_double(trim(t.substr(0, dots)));
    const double hi = to_double(trim(t.substr(dots + 2, step_at - dots - 2)));
    const double step = to_double(trim(t.substr(step_at + 4)));
    if (!(step > 0.0) || hi < lo) throw ConfigError("load", "bad range '" + t + "'");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      // Round away the binary drift so 0.1 + 2*0.1 prints as 0.3.
      out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return out;
  }
  for (const std::string& item : split(t, ',')) out.push_back(to_double(item));
  if (out.empty()) throw ConfigError("load", "empty list");
  return out;
}

void RunConfig::validate() const {
  auto check = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  };
  check("p", [&] { topo.validate(); });
  check("pattern", [&] { pattern.validate(Topology(topo)); });
  check("alpha", [&] { routing.hp.validate(); });
  check("packet_bytes", [&] { timing.validate(); });
  if (routing.ugal_bias < 0) throw ConfigError("ugal_bias", "must be >= 0");
  if (routing.maxq < 0) throw ConfigError("maxq", "must be >= 0");
  if (timing.vc_buffer < 1) throw ConfigError("vc_buffer", "must be >= 1");
  if (timing.output_buffer < 1) throw ConfigError("output_buffer", "must be >= 1");
  if (warmup_ns < 0) throw ConfigError("warmup_ns", "must be >= 0");
  if (measure_ns <= 0) throw ConfigError("measure_ns", "must be > 0");
  if (t_end_ns != 0 && t_end_ns < warmup_ns + measure_ns) {
    throw ConfigError("t_end_ns", "must be >= warmup_ns + measure_ns");
  }
  if (window_ns <= 0) throw ConfigError("window_ns", "must be > 0");
  if (!(converge_tol > 0.0)) throw ConfigError("converge_tol", "must be > 0");
  if (converge_hold < 1) throw ConfigError("converge_hold", "must be >= 1");
  if (stall_ns <= 0) throw ConfigError("stall_ns", "must be > 0");
  const int m = topo.routers();
  for (RouterId r : qtable_routers) {
    if (r < 0 || r >= m) throw ConfigError("qtable_routers", "router " + std::to_string(r) + " out of range");
  }
  for (TimeNs t : qtable_snapshot_ns) {
    if (t < 0) throw ConfigError("qtable_snapshot_ns", "times must be >= 0");
  }
}

std::string RunConfig::dump() const {
  std::string out;
  const bool scheduled = schedule.segments().size() > 1 || schedule.segments().front().start != 0;
  for (const KeyDef& d : key_defs()) {
    const std::string name = d.name;
    if (name == (scheduled ? "load" : "load_schedule")) continue;
    out += name + " = " + d.get(*this) + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::istringstream in(dump());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("seed ", 0) == 0) continue;
    for (unsigned char ch : line + "\n") {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  find_key(k);
  values_[k] = trim(value);
}

void ConfigMap::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(trim(assignment), "expected key=value");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void ConfigMap::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(trim(line), origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ConfigMap::apply_preset(const std::string& name) {
  auto desk = [&] {
    set("p", "2");
    set("a", "4");
    set("h", "2");
  };
  if (name == "desk-72") {
    desk();
  } else if (name == "paper-1056") {
    set("p", "4");
    set("a", "8");
    set("h", "4");
  } else if (name == "paper-2550") {
    set("p", "5");
    set("a", "10");
    set("h", "5");
    set("q_thld1", "0.05");
    set("q_thld2", "0.4");
  } else if (name == "figure5") {
    desk();
    set("pattern", "ur,adv:1,adv:4");
    set("load", "0.1..1.0 step 0.1");
    set("routing", "min,valn,ugalg,ugaln,par,qadaptive");
  } else if (name == "figure6") {
    desk();
    set("pattern", "ur,adv:1,adv:4");
    set("load", "0.45,0.8");
    set("routing", "min,ugalg,ugaln,par,qadaptive");
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
}

const std::string& ConfigMap::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "not set");
  return it->second;
}

std::string ConfigMap::dump() const {
  std::string out;
  for (const KeyDef& d : key_defs()) {
    const auto it = values_.find(d.name);
    if (it != values_.end()) out += it->first + " = " + it->second + "\n";
  }
  return out;
}

RunConfig resolve(const ConfigMap& map) {
  RunConfig cfg;
  for (const KeyDef& d : key_defs()) {
    const std::string name = d.name;
    if (name == "load_schedule" || !map.has(name)) continue;
    const std::string& value = map.get(name);
    if (is_sweep_key(name) && value.find(',') != std::string::npos) {
      throw ConfigError(name, "list value needs a sweep");
    }
    try {
      d.set(cfg, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(name, e.what());
    }
  }
  if (map.has("load_schedule")) {
    try {
      cfg.schedule = LoadSchedule::parse(map.get("load_schedule"));
    } catch (const std::exception& e) {
      throw ConfigError("load_schedule", e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<RunConfig> expand(const ConfigMap& map) {
  const auto patterns = sweep_values(map, "pattern");
  const auto loads = sweep_values(map, "load");
  const auto routings = sweep_values(map, "routing");
  const auto seeds = sweep_values(map, "seed");
  std::vector<RunConfig> cells;
  for (const std::string& pattern : patterns) {
    for (const std::string& load : loads) {
      for (const std::string& routing : routings) {
        for (const std::string& seed : seeds) {
          ConfigMap cell = map;
          if (!pattern.empty()) cell.set("pattern", pattern);
          if (!load.empty()) cell.set("load", load);
          if (!routing.empty()) cell.set("routing", routing);
          if (!seed.empty()) cell.set("seed", seed);
          cells.push_back(resolve(cell));
        }
      }
    }
  }
  return cells;
}

}  // namespace dfsim
