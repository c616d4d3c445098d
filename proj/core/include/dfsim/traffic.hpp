#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfsim/engine.hpp"
#include "dfsim/router_state.hpp"
#include "dfsim/topology.hpp"

namespace dfsim {

enum class PatternKind : std::uint8_t { kUniform, kAdversarial, kStencil3d, kManyToMany, kRandNeighbors };

// Config spellings: ur | adv:<i> | stencil3d:<X>x<Y>x<Z> | m2m:<X>x<Y>x<Z> |
// randneighbors:<min>-<max>
struct TrafficPattern {
  PatternKind kind = PatternKind::kUniform;
  int shift = 1;
  int x = 0;
  int y = 0;
  int z = 0;
  int min_targets = 6;
  int max_targets = 20;

  static TrafficPattern parse(const std::string& text);
  std::string to_string() const;
  void validate(const Topology& topo) const;
};

struct LoadSegment {
  TimeNs start = 0;
  double load = 0.0;
};

// Piecewise-constant offered load over time.
class LoadSchedule {
 public:
  LoadSchedule() = default;
  explicit LoadSchedule(std::vector<LoadSegment> segments);
  static LoadSchedule constant(double load) { return LoadSchedule({{0, load}}); }
  // Accepts "[(t_ns,load),(t_ns,load),...]".
  static LoadSchedule parse(const std::string& text);

  const std::vector<LoadSegment>& segments() const { return segments_; }
  double load_at(TimeNs t) const;
  std::string to_string() const;

 private:
  std::vector<LoadSegment> segments_;
};

// Per-node packet spacing for an offered load: packet time / load.
double generation_interval(double load, const TimingParams& timing);

// Grid coordinates used by the stencil and many-to-many patterns.
struct GridPoint {
  int x;
  int y;
  int z;
};
GridPoint grid_point(NodeId n, int dim_x, int dim_y);
NodeId grid_node(const GridPoint& pt, int dim_x, int dim_y);
std::vector<NodeId> stencil_neighbors(NodeId n, int dim_x, int dim_y, int dim_z);
std::vector<NodeId> z_communicator_peers(NodeId n, int dim_x, int dim_y, int dim_z);

// Destination choice per pattern. Stateless patterns draw from the node's
// traffic stream; neighbor patterns cycle through a fixed target list.
class DestinationPicker {
 public:
  DestinationPicker(const Topology& topo, const TrafficPattern& pattern, std::uint64_t seed);

  // -1 when the node has no targets under this pattern.
  NodeId pick(NodeId src);
  const std::vector<NodeId>& targets(NodeId src) const { return targets_[src]; }

 private:
  const Topology& topo_;
  TrafficPattern pattern_;
  std::vector<RngStream> rngs_;
  std::vector<std::vector<NodeId>> targets_;
  std::vector<std::uint32_t> cursor_;
};

// Stateless single draw for UR and ADV(i).
NodeId pick_destination(const Topology& topo, const TrafficPattern& pattern, NodeId src, RngStream& rng);

}  // namespace dfsim
