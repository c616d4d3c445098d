#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dfsim/engine.hpp"
#include "dfsim/packet.hpp"
#include "dfsim/router_state.hpp"
#include "dfsim/topology.hpp"

namespace dfsim {

enum class RoutingTag : std::uint8_t { kMin, kValg, kValn, kUgalg, kUgaln, kPar, kQRouting, kQAdaptive };

std::string to_string(RoutingTag tag);
// Accepts the config spellings: min|valg|valn|ugalg|ugaln|par|qrouting|qadaptive.
RoutingTag parse_routing(const std::string& text);
std::vector<RoutingTag> all_routings();

// Hop cap per algorithm; the VC count equals the cap (vc = hop index).
int hop_cap(RoutingTag tag, int maxq);

// Hysteretic learning parameters (alpha for improvements, beta otherwise).
struct QHyperParams {
  double alpha = 0.2;
  double beta = 0.04;
  double epsilon = 0.001;
  double q_thld1 = 0.2;
  double q_thld2 = 0.35;

  void validate() const;
};

struct RoutingSpec {
  RoutingTag tag = RoutingTag::kMin;
  int ugal_bias = 0;
  int maxq = 2;
  QHyperParams hp;

  int hop_cap() const { return dfsim::hop_cap(tag, maxq); }
  int vc_count() const { return hop_cap(); }
};

// What a routing decision may look at: the deciding router's own state.
struct RouteContext {
  const Topology& topo;
  RouterId router;
  PortId in_port;
  const RouterState& state;
  TimeNs now;
};

// Value report sent upstream with the credit when a packet leaves a router.
struct FeedbackMsg {
  std::int32_t row = 0;
  PortId port = kNoPort;  // output port at the upstream router
  TimeNs reward = 0;      // arrival-to-arrival time between the two routers
  double q_next = 0.0;    // downstream estimate of the remaining time
};

class RoutingPolicy {
 public:
  virtual ~RoutingPolicy() = default;

  virtual RoutingTag tag() const = 0;
  // Chooses an output port for a packet that is not at its destination
  // router. May update pkt.phase.
  virtual PortId route(Packet& pkt, const RouteContext& ctx) = 0;

  virtual bool learns() const { return false; }
  // Report for the upstream router; only called when learns().
  virtual FeedbackMsg make_feedback(RouterId /*router*/, const Packet& /*pkt*/, PortId /*out_port*/) const {
    return {};
  }
  virtual void apply_feedback(RouterId /*router*/, const FeedbackMsg& /*msg*/) {}
};

// Baseline decisions. Each returns the output port at ctx.router.
PortId route_min(const Packet& pkt, const RouteContext& ctx);
PortId route_valg(Packet& pkt, const RouteContext& ctx, RngStream& rng);
PortId route_valn(Packet& pkt, const RouteContext& ctx, RngStream& rng);
enum class UgalVariant : std::uint8_t { kGroup, kNode };
PortId route_ugal(Packet& pkt, const RouteContext& ctx, RngStream& rng, UgalVariant variant, int bias);
PortId route_par(Packet& pkt, const RouteContext& ctx, RngStream& rng, int bias);

// UGAL commit rule: minimal iff q_min < 2*q_nonmin + bias.
inline bool ugal_prefers_minimal(int q_min, int q_nonmin, int bias) { return q_min < 2 * q_nonmin + bias; }

// Random intermediate outside the source and destination groups; -1 when
// none exists.
GroupId draw_intermediate_group(const Topology& topo, GroupId src, GroupId dst, RngStream& rng);
RouterId draw_intermediate_router(const Topology& topo, GroupId src, GroupId dst, RngStream& rng);

// Next port toward the packet's current waypoint, clearing waypoints that
// have been reached, then toward the destination router.
PortId follow_waypoints(Packet& pkt, const Topology& topo, RouterId here);

std::unique_ptr<RoutingPolicy> make_policy(const Topology& topo, const RoutingSpec& spec, const TimingParams& timing,
                                           std::uint64_t seed);

}  // namespace dfsim
