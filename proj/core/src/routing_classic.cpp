#include <algorithm>
#include <climits>
#include <stdexcept>

#include "dfsim/qlearn.hpp"
#include "dfsim/routing.hpp"

namespace dfsim {

std::string to_string(RoutingTag tag) {
  switch (tag) {
    case RoutingTag::kMin:
      return "min";
    case RoutingTag::kValg:
      return "valg";
    case RoutingTag::kValn:
      return "valn";
    case RoutingTag::kUgalg:
      return "ugalg";
    case RoutingTag::kUgaln:
      return "ugaln";
    case RoutingTag::kPar:
      return "par";
    case RoutingTag::kQRouting:
      return "qrouting";
    case RoutingTag::kQAdaptive:
      return "qadaptive";
  }
  return "?";
}

RoutingTag parse_routing(const std::string& text) {
  for (RoutingTag tag : all_routings()) {
    if (to_string(tag) == text) return tag;
  }
  throw std::invalid_argument("unknown routing '" + text + "'");
}

std::vector<RoutingTag> all_routings() {
  return {RoutingTag::kMin,   RoutingTag::kValg, RoutingTag::kValn,     RoutingTag::kUgalg,
          RoutingTag::kUgaln, RoutingTag::kPar,  RoutingTag::kQRouting, RoutingTag::kQAdaptive};
}

int hop_cap(RoutingTag tag, int maxq) {
  switch (tag) {
    case RoutingTag::kMin:
      return 3;
    case RoutingTag::kValg:
    case RoutingTag::kUgalg:
    case RoutingTag::kQAdaptive:
      return 5;
    case RoutingTag::kValn:
    case RoutingTag::kUgaln:
      return 6;
    case RoutingTag::kPar:
      return 7;
    case RoutingTag::kQRouting:
      return maxq + 3;
  }
  return 3;
}

GroupId draw_intermediate_group(const Topology& topo, GroupId src, GroupId dst, RngStream& rng) {
  const int excluded = src == dst ? 1 : 2;
  const int choices = topo.g() - excluded;
  if (choices <= 0) return -1;
  const GroupId lo = std::min(src, dst);
  const GroupId hi = std::max(src, dst);
  auto group = static_cast<GroupId>(rng.below(static_cast<std::uint64_t>(choices)));
  if (group >= lo) ++group;
  if (hi != lo && group >= hi) ++group;
  return group;
}

RouterId draw_intermediate_router(const Topology& topo, GroupId src, GroupId dst, RngStream& rng) {
  const GroupId group = draw_intermediate_group(topo, src, dst, rng);
  if (group < 0) return -1;
  return topo.router_at(group, static_cast<int>(rng.below(static_cast<std::uint64_t>(topo.a()))));
}

PortId follow_waypoints(Packet& pkt, const Topology& topo, RouterId here) {
  if (pkt.phase.via_router >= 0) {
    if (here != pkt.phase.via_router) return topo.min_port_to_router(here, pkt.phase.via_router);
    pkt.phase.via_router = -1;
  }
  if (pkt.phase.via_group >= 0) {
    if (topo.group_of(here) != pkt.phase.via_group) return topo.min_port_to_group(here, pkt.phase.via_group);
    pkt.phase.via_group = -1;
  }
  return topo.min_port_to_router(here, pkt.dst_router);
}

PortId route_min(const Packet& pkt, const RouteContext& ctx) {
  return ctx.topo.min_port_to_router(ctx.router, pkt.dst_router);
}

namespace {

bool at_source_router(const Packet& pkt) { return pkt.hops == 0; }

// Compares the minimal first hop against two random non-minimal candidates
// and commits the packet to one of them.
void ugal_decide(Packet& pkt, const RouteContext& ctx, RngStream& rng, UgalVariant variant, int bias) {
  const Topology& topo = ctx.topo;
  const int q_min = ctx.state.congestion_estimate(route_min(pkt, ctx));
  int best_q = INT_MAX;
  RouterId best_router = -1;
  GroupId best_group = -1;
  for (int candidate = 0; candidate < 2; ++candidate) {
    PortId port = kNoPort;
    RouterId via_router = -1;
    GroupId via_group = -1;
    if (variant == UgalVariant::kGroup) {
      via_group = draw_intermediate_group(topo, pkt.src_group, pkt.dst_group, rng);
      if (via_group < 0) break;
      port = topo.min_port_to_group(ctx.router, via_group);
    } else {
      via_router = draw_intermediate_router(topo, pkt.src_group, pkt.dst_group, rng);
      if (via_router < 0) break;
      port = topo.min_port_to_router(ctx.router, via_router);
    }
    const int q = ctx.state.congestion_estimate(port);
    if (q < best_q) {
      best_q = q;
      best_router = via_router;
      best_group = via_group;
    }
  }
  if (best_q == INT_MAX || ugal_prefers_minimal(q_min, best_q, bias)) {
    pkt.phase.mode = PathMode::kMinimal;
    return;
  }
  pkt.phase.mode = PathMode::kNonMinimal;
  pkt.phase.via_router = best_router;
  pkt.phase.via_group = best_group;
}

}  // namespace

PortId route_valg(Packet& pkt, const RouteContext& ctx, RngStream& rng) {
  if (at_source_router(pkt) && pkt.phase.mode == PathMode::kUndecided) {
    const GroupId via = draw_intermediate_group(ctx.topo, pkt.src_group, pkt.dst_group, rng);
    pkt.phase.mode = via < 0 ? PathMode::kMinimal : PathMode::kNonMinimal;
    pkt.phase.via_group = via;
  }
  return follow_waypoints(pkt, ctx.topo, ctx.router);
}

PortId route_valn(Packet& pkt, const RouteContext& ctx, RngStream& rng) {
  if (at_source_router(pkt) && pkt.phase.mode == PathMode::kUndecided) {
    const RouterId via = draw_intermediate_router(ctx.topo, pkt.src_group, pkt.dst_group, rng);
    pkt.phase.mode = via < 0 ? PathMode::kMinimal : PathMode::kNonMinimal;
    pkt.phase.via_router = via;
  }
  return follow_waypoints(pkt, ctx.topo, ctx.router);
}

PortId route_ugal(Packet& pkt, const RouteContext& ctx, RngStream& rng, UgalVariant variant, int bias) {
  if (at_source_router(pkt) && pkt.phase.mode == PathMode::kUndecided) ugal_decide(pkt, ctx, rng, variant, bias);
  return follow_waypoints(pkt, ctx.topo, ctx.router);
}

PortId route_par(Packet& pkt, const RouteContext& ctx, RngStream& rng, int bias) {
  const bool in_source_group = ctx.topo.group_of(ctx.router) == pkt.src_group;
  const bool undecided = at_source_router(pkt) && pkt.phase.mode == PathMode::kUndecided;
  const bool reevaluate = !at_source_router(pkt) && in_source_group && pkt.phase.mode == PathMode::kMinimal;
  if (undecided || reevaluate) ugal_decide(pkt, ctx, rng, UgalVariant::kNode, bias);
  return follow_waypoints(pkt, ctx.topo, ctx.router);
}

namespace {

class ClassicPolicy final : public RoutingPolicy {
 public:
  ClassicPolicy(const Topology& topo, const RoutingSpec& spec, std::uint64_t seed) : spec_(spec) {
    rngs_.reserve(static_cast<std::size_t>(topo.m()));
    for (RouterId r = 0; r < topo.m(); ++r) {
      rngs_.emplace_back(seed, StreamTag::kIntermediate, static_cast<std::uint32_t>(r));
    }
  }

  RoutingTag tag() const override { return spec_.tag; }

  PortId route(Packet& pkt, const RouteContext& ctx) override {
    RngStream& rng = rngs_[ctx.router];
    switch (spec_.tag) {
      case RoutingTag::kValg:
        return route_valg(pkt, ctx, rng);
      case RoutingTag::kValn:
        return route_valn(pkt, ctx, rng);
      case RoutingTag::kUgalg:
        return route_ugal(pkt, ctx, rng, UgalVariant::kGroup, spec_.ugal_bias);
      case RoutingTag::kUgaln:
        return route_ugal(pkt, ctx, rng, UgalVariant::kNode, spec_.ugal_bias);
      case RoutingTag::kPar:
        return route_par(pkt, ctx, rng, spec_.ugal_bias);
      default:
        return route_min(pkt, ctx);
    }
  }

 private:
  RoutingSpec spec_;
  std::vector<RngStream> rngs_;
};

}  // namespace

std::unique_ptr<RoutingPolicy> make_policy(const Topology& topo, const RoutingSpec& spec, const TimingParams& timing,
                                           std::uint64_t seed) {
  switch (spec.tag) {
    case RoutingTag::kQAdaptive:
      return std::make_unique<QAdaptivePolicy>(topo, spec.hp, timing, seed);
    case RoutingTag::kQRouting:
      return std::make_unique<QRoutingPolicy>(topo, spec.hp, spec.maxq, timing, seed);
    default:
      return std::make_unique<ClassicPolicy>(topo, spec, seed);
  }
}

}  // namespace dfsim
