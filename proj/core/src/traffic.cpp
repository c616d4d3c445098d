#include "dfsim/traffic.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace dfsim {

namespace {

int parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument("bad " + what + " '" + text + "'");
  return value;
}

void parse_dims(const std::string& text, TrafficPattern& out) {
  static const std::regex dims(R"((\d+)x(\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, dims)) throw std::invalid_argument("bad grid '" + text + "' (want XxYxZ)");
  out.x = parse_int(m[1], "grid X");
  out.y = parse_int(m[2], "grid Y");
  out.z = parse_int(m[3], "grid Z");
}

}  // namespace

TrafficPattern TrafficPattern::parse(const std::string& text) {
  TrafficPattern out;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "ur" && arg.empty()) {
    out.kind = PatternKind::kUniform;
  } else if (head == "adv") {
    out.kind = PatternKind::kAdversarial;
    out.shift = parse_int(arg, "adv shift");
  } else if (head == "stencil3d") {
    out.kind = PatternKind::kStencil3d;
    parse_dims(arg, out);
  } else if (head == "m2m") {
    out.kind = PatternKind::kManyToMany;
    parse_dims(arg, out);
  } else if (head == "randneighbors") {
    out.kind = PatternKind::kRandNeighbors;
    if (!arg.empty()) {
      const auto dash = arg.find('-');
      if (dash == std::string::npos) throw std::invalid_argument("bad randneighbors range '" + arg + "'");
      out.min_targets = parse_int(arg.substr(0, dash), "randneighbors min");
      out.max_targets = parse_int(arg.substr(dash + 1), "randneighbors max");
    }
  } else {
    throw std::invalid_argument("unknown pattern '" + text + "'");
  }
  return out;
}

std::string TrafficPattern::to_string() const {
  switch (kind) {
    case PatternKind::kUniform:
      return "ur";
    case PatternKind::kAdversarial:
      return "adv:" + std::to_string(shift);
    case PatternKind::kStencil3d:
      return "stencil3d:" + std::to_string(x) + "x" + std::to_string(y) + "x" + std::to_string(z);
    case PatternKind::kManyToMany:
      return "m2m:" + std::to_string(x) + "x" + std::to_string(y) + "x" + std::to_string(z);
    case PatternKind::kRandNeighbors:
      return "randneighbors:" + std::to_string(min_targets) + "-" + std::to_string(max_targets);
  }
  return "?";
}

void TrafficPattern::validate(const Topology& topo) const {
  switch (kind) {
    case PatternKind::kUniform:
      if (topo.n() < 2) throw std::invalid_argument("uniform traffic needs at least two nodes");
      break;
    case PatternKind::kAdversarial:
      if (shift < 1 || shift >= topo.g()) {
        throw std::invalid_argument("adv:<i> needs 1 <= i < g (g=" + std::to_string(topo.g()) + ")");
      }
      break;
    case PatternKind::kStencil3d:
    case PatternKind::kManyToMany:
      if (x < 1 || y < 1 || z < 1 || static_cast<long long>(x) * y * z != topo.n()) {
        throw std::invalid_argument("grid " + to_string() + " must multiply out to N=" + std::to_string(topo.n()));
      }
      break;
    case PatternKind::kRandNeighbors:
      if (min_targets < 1 || max_targets < min_targets || max_targets > topo.n() - 1) {
        throw std::invalid_argument("randneighbors range must satisfy 1 <= min <= max < N");
      }
      break;
  }
}

LoadSchedule::LoadSchedule(std::vector<LoadSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("load schedule is empty");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const LoadSegment& seg = segments_[i];
    if (seg.start < 0) throw std::invalid_argument("load schedule times must be >= 0");
    if (!(seg.load >= 0.0 && seg.load <= 1.0)) throw std::invalid_argument("offered load must lie in [0,1]");
    if (i > 0 && seg.start <= segments_[i - 1].start) {
      throw std::invalid_argument("load schedule segments must be strictly ordered");
    }
  }
}

LoadSchedule LoadSchedule::parse(const std::string& text) {
  static const std::regex item(R"(\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\))");
  std::vector<LoadSegment> segments;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), item); it != std::sregex_iterator(); ++it) {
    LoadSegment seg;
    seg.start = std::stoll((*it)[1]);
    seg.load = std::stod((*it)[2]);
    segments.push_back(seg);
  }
  if (segments.empty()) throw std::invalid_argument("bad load_schedule '" + text + "'");
  return LoadSchedule(std::move(segments));
}

double LoadSchedule::load_at(TimeNs t) const {
  double load = 0.0;
  for (const LoadSegment& seg : segments_) {
    if (seg.start > t) break;
    load = seg.load;
  }
  return load;
}

std::string LoadSchedule::to_string() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%lld,%g)", static_cast<long long>(segments_[i].start), segments_[i].load);
    out << (i ? "," : "") << buf;
  }
  out << ']';
  return out.str();
}

double generation_interval(double load, const TimingParams& timing) {
  if (!(load > 0.0)) throw std::invalid_argument("generation_interval needs load > 0");
  return static_cast<double>(timing.serialization_ns()) / load;
}

GridPoint grid_point(NodeId n, int dim_x, int dim_y) {
  return {n % dim_x, (n / dim_x) % dim_y, n / (dim_x * dim_y)};
}

NodeId grid_node(const GridPoint& pt, int dim_x, int dim_y) { return pt.x + dim_x * (pt.y + dim_y * pt.z); }

std::vector<NodeId> stencil_neighbors(NodeId n, int dim_x, int dim_y, int dim_z) {
  const GridPoint c = grid_point(n, dim_x, dim_y);
  std::vector<NodeId> out;
  auto add = [&](GridPoint pt) {
    if (pt.x >= 0 && pt.x < dim_x && pt.y >= 0 && pt.y < dim_y && pt.z >= 0 && pt.z < dim_z) {
      out.push_back(grid_node(pt, dim_x, dim_y));
    }
  };
  add({c.x - 1, c.y, c.z});
  add({c.x + 1, c.y, c.z});
  add({c.x, c.y - 1, c.z});
  add({c.x, c.y + 1, c.z});
  add({c.x, c.y, c.z - 1});
  add({c.x, c.y, c.z + 1});
  return out;
}

std::vector<NodeId> z_communicator_peers(NodeId n, int dim_x, int dim_y, int dim_z) {
  const GridPoint c = grid_point(n, dim_x, dim_y);
  std::vector<NodeId> out;
  // Start after self so members do not all target z=0 first.
  for (int step = 1; step < dim_z; ++step) out.push_back(grid_node({c.x, c.y, (c.z + step) % dim_z}, dim_x, dim_y));
  return out;
}

NodeId pick_destination(const Topology& topo, const TrafficPattern& pattern, NodeId src, RngStream& rng) {
  switch (pattern.kind) {
    case PatternKind::kUniform: {
      auto dst = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(topo.n() - 1)));
      return dst >= src ? dst + 1 : dst;
    }
    case PatternKind::kAdversarial: {
      const GroupId group = (topo.group_of_node(src) + pattern.shift) % topo.g();
      const int per_group = topo.a() * topo.p();
      return group * per_group + static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(per_group)));
    }
    default:
      throw std::logic_error("pick_destination: pattern " + pattern.to_string() + " needs a DestinationPicker");
  }
}

DestinationPicker::DestinationPicker(const Topology& topo, const TrafficPattern& pattern, std::uint64_t seed)
    : topo_(topo), pattern_(pattern) {
  pattern_.validate(topo);
  const int n = topo.n();
  rngs_.reserve(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) rngs_.emplace_back(seed, StreamTag::kTraffic, static_cast<std::uint32_t>(i));
  targets_.resize(static_cast<std::size_t>(n));
  cursor_.assign(static_cast<std::size_t>(n), 0);
  switch (pattern_.kind) {
    case PatternKind::kStencil3d:
      for (NodeId i = 0; i < n; ++i) targets_[i] = stencil_neighbors(i, pattern_.x, pattern_.y, pattern_.z);
      break;
    case PatternKind::kManyToMany:
      for (NodeId i = 0; i < n; ++i) targets_[i] = z_communicator_peers(i, pattern_.x, pattern_.y, pattern_.z);
      break;
    case PatternKind::kRandNeighbors:
      for (NodeId i = 0; i < n; ++i) {
        RngStream setup(seed, StreamTag::kSetup, static_cast<std::uint32_t>(i));
        const int span = pattern_.max_targets - pattern_.min_targets + 1;
        const int count = pattern_.min_targets + static_cast<int>(setup.below(static_cast<std::uint64_t>(span)));
        std::vector<NodeId>& set = targets_[i];
        while (static_cast<int>(set.size()) < count) {
          auto cand = static_cast<NodeId>(setup.below(static_cast<std::uint64_t>(n - 1)));
          if (cand >= i) ++cand;
          if (std::find(set.begin(), set.end(), cand) == set.end()) set.push_back(cand);
        }
      }
      break;
    default:
      break;
  }
}

NodeId DestinationPicker::pick(NodeId src) {
  switch (pattern_.kind) {
    case PatternKind::kUniform:
    case PatternKind::kAdversarial:
      return pick_destination(topo_, pattern_, src, rngs_[src]);
    case PatternKind::kRandNeighbors: {
      const std::vector<NodeId>& set = targets_[src];
      return set[rngs_[src].below(set.size())];
    }
    default: {
      const std::vector<NodeId>& list = targets_[src];
      if (list.empty()) return -1;
      const NodeId dst = list[cursor_[src] % list.size()];
      ++cursor_[src];
      return dst;
    }
  }
}

}  // namespace dfsim
