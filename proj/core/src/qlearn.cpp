#include "dfsim/qlearn.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace dfsim {

void QHyperParams::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(alpha) || !unit(beta)) throw std::invalid_argument("alpha and beta must lie in [0,1]");
  if (!unit(epsilon)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (!(q_thld1 >= 0.0) || !(q_thld2 >= 0.0)) throw std::invalid_argument("q_thld1/q_thld2 must be >= 0");
}

int QTable::argmin(int row) const {
  const double* values = &values_[static_cast<std::size_t>(row) * cols_];
  int best = 0;
  for (int c = 1; c < cols_; ++c) {
    if (values[c] < values[best]) best = c;
  }
  return best;
}

void QTable::write_csv(std::ostream& out, const std::string& prefix) const {
  char buf[96];
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.6f\n", r, c, at(r, c));
      out << prefix << buf;
    }
  }
}

PortId select_temp_port(double q_min, double q_best, PortId min_port, PortId best_port, double threshold) {
  if (!(q_min > 0.0)) return min_port;
  const double delta_v = (q_min - q_best) / q_min;
  return delta_v < threshold ? min_port : best_port;
}

double hysteretic_update(double q, double reward, double q_next, double alpha, double beta) {
  const double delta = reward + q_next - q;
  return q + (delta < 0.0 ? alpha : beta) * delta;
}

double qrouting_update(double q, double reward, double q_next, double alpha) {
  return q + alpha * (reward + q_next - q);
}

TimeNs host_delivery_ns(const TimingParams& timing) { return timing.link_time(PortKind::kHost); }

namespace {

// Zero-load time from arrival at `from` (outside `group`) to arrival at the
// first router of `group`.
TimeNs reach_group_ns(const Topology& topo, RouterId from, GroupId group, const TimingParams& timing) {
  const Topology::Gateway gw = topo.gateway_to_group(from, group);
  return (gw.router == from ? 0 : timing.link_time(PortKind::kLocal)) + timing.link_time(PortKind::kGlobal);
}

TimeNs router_to_router_ns(const Topology& topo, RouterId from, RouterId to, const TimingParams& timing) {
  TimeNs total = 0;
  for (PortId port : topo.minimal_path(from, to)) total += timing.link_time(topo.kind(port));
  return total;
}

}  // namespace

void q_init(TwoLevelQTable& table, const Topology& topo, RouterId router, const TimingParams& timing) {
  // Delivery inside a destination group is costed as one local hop plus the
  // host link, whichever router of the group is reached first.
  const TimeNs host = host_delivery_ns(timing);
  const TimeNs group_tail = timing.link_time(PortKind::kLocal) + host;
  const GroupId own = topo.group_of(router);
  for (GroupId j = 0; j < topo.g(); ++j) {
    for (int col = 0; col < topo.network_ports(); ++col) {
      const PortId port = topo.p() + col;
      const PortKind kind = topo.kind(port);
      const RouterId next = topo.peer(router, port).router;
      TimeNs value = timing.link_time(kind);
      if (j == own) {
        value += kind == PortKind::kLocal ? host : reach_group_ns(topo, next, j, timing) + group_tail;
      } else if (topo.group_of(next) == j) {
        value += group_tail;
      } else {
        value += reach_group_ns(topo, next, j, timing) + group_tail;
      }
      for (int n = 0; n < topo.p(); ++n) table.at(table.row_of(j, n), col) = static_cast<double>(value);
    }
  }
}

void q_init(LegacyQTable& table, const Topology& topo, RouterId router, const TimingParams& timing) {
  const TimeNs host = host_delivery_ns(timing);
  for (int col = 0; col < topo.network_ports(); ++col) {
    const PortId port = topo.p() + col;
    const RouterId next = topo.peer(router, port).router;
    const TimeNs hop = timing.link_time(topo.kind(port));
    for (RouterId d = 0; d < topo.m(); ++d) {
      table.at(d, col) = static_cast<double>(hop + router_to_router_ns(topo, next, d, timing) + host);
    }
  }
}

QAdaptivePolicy::QAdaptivePolicy(const Topology& topo, const QHyperParams& hp, const TimingParams& timing,
                                 std::uint64_t seed)
    : topo_(topo), hp_(hp), host_delivery_(host_delivery_ns(timing)) {
  hp_.validate();
  tables_.reserve(static_cast<std::size_t>(topo.m()));
  explore_.reserve(static_cast<std::size_t>(topo.m()));
  for (RouterId r = 0; r < topo.m(); ++r) {
    tables_.emplace_back(topo);
    q_init(tables_.back(), topo, r, timing);
    explore_.emplace_back(seed, StreamTag::kExploration, static_cast<std::uint32_t>(r));
  }
}

PortId QAdaptivePolicy::route(Packet& pkt, const RouteContext& ctx) {
  if (topo_.group_of(ctx.router) == pkt.dst_group) return route_min(pkt, ctx);
  if (pkt.hops == 0) return route_at_source(pkt, ctx);
  if (pkt.phase.first_intermediate) {
    pkt.phase.first_intermediate = false;
    return route_at_intermediate(pkt, ctx);
  }
  return route_min(pkt, ctx);
}

PortId QAdaptivePolicy::route_at_source(Packet& pkt, const RouteContext& ctx) {
  const TwoLevelQTable& table = tables_[ctx.router];
  const int row = table.row_of(pkt.dst_group, pkt.src_local);
  const int p = topo_.p();
  const PortId best_port = p + table.argmin(row);
  const PortId min_port = topo_.min_port_to_group(ctx.router, pkt.dst_group);
  const PortId temp =
      select_temp_port(table.at(row, min_port - p), table.at(row, best_port - p), min_port, best_port, hp_.q_thld1);
  RngStream& rng = explore_[ctx.router];
  const PortId chosen =
      rng.bernoulli(hp_.epsilon) ? p + static_cast<PortId>(rng.below(static_cast<std::uint64_t>(topo_.network_ports())))
                                 : temp;
  pkt.phase.mode = chosen == min_port ? PathMode::kMinimal : PathMode::kNonMinimal;
  return chosen;
}

PortId QAdaptivePolicy::route_at_intermediate(Packet& pkt, const RouteContext& ctx) {
  const Topology::Gateway gw = topo_.gateway_to_group(ctx.router, pkt.dst_group);
  if (gw.router == ctx.router) return gw.port;
  const TwoLevelQTable& table = tables_[ctx.router];
  const int row = table.row_of(pkt.dst_group, pkt.src_local);
  const int p = topo_.p();
  const int locals = topo_.a() - 1;
  const PortId min_port = topo_.local_port_to(ctx.router, gw.router);
  RngStream& rng = explore_[ctx.router];
  PortId best_port = min_port;
  if (locals > 1) {
    // Uniform over the other local ports.
    best_port = p + static_cast<PortId>(rng.below(static_cast<std::uint64_t>(locals - 1)));
    if (best_port >= min_port) ++best_port;
  }
  const PortId temp =
      select_temp_port(table.at(row, min_port - p), table.at(row, best_port - p), min_port, best_port, hp_.q_thld2);
  if (rng.bernoulli(hp_.epsilon)) return p + static_cast<PortId>(rng.below(static_cast<std::uint64_t>(locals)));
  return temp;
}

FeedbackMsg QAdaptivePolicy::make_feedback(RouterId router, const Packet& pkt, PortId out_port) const {
  const TwoLevelQTable& table = tables_[router];
  FeedbackMsg msg;
  msg.row = table.row_of(pkt.dst_group, pkt.src_local);
  msg.q_next = out_port < topo_.p() ? static_cast<double>(host_delivery_) : table.at(msg.row, out_port - topo_.p());
  return msg;
}

void QAdaptivePolicy::apply_feedback(RouterId router, const FeedbackMsg& msg) {
  double& q = tables_[router].at(msg.row, msg.port - topo_.p());
  q = hysteretic_update(q, static_cast<double>(msg.reward), msg.q_next, hp_.alpha, hp_.beta);
  ++updates_;
}

QRoutingPolicy::QRoutingPolicy(const Topology& topo, const QHyperParams& hp, int maxq, const TimingParams& timing,
                               std::uint64_t seed)
    : topo_(topo), hp_(hp), maxq_(maxq), host_delivery_(host_delivery_ns(timing)) {
  hp_.validate();
  if (maxq < 0) throw std::invalid_argument("maxq must be >= 0");
  tables_.reserve(static_cast<std::size_t>(topo.m()));
  explore_.reserve(static_cast<std::size_t>(topo.m()));
  for (RouterId r = 0; r < topo.m(); ++r) {
    tables_.emplace_back(topo);
    q_init(tables_.back(), topo, r, timing);
    explore_.emplace_back(seed, StreamTag::kExploration, static_cast<std::uint32_t>(r));
  }
}

PortId QRoutingPolicy::route(Packet& pkt, const RouteContext& ctx) {
  if (pkt.hops >= maxq_) {
    pkt.phase.mode = PathMode::kMinimal;
    return route_min(pkt, ctx);
  }
  const LegacyQTable& table = tables_[ctx.router];
  const int p = topo_.p();
  RngStream& rng = explore_[ctx.router];
  if (rng.bernoulli(hp_.epsilon)) {
    return p + static_cast<PortId>(rng.below(static_cast<std::uint64_t>(topo_.network_ports())));
  }
  return p + table.argmin(pkt.dst_router);
}

FeedbackMsg QRoutingPolicy::make_feedback(RouterId router, const Packet& pkt, PortId out_port) const {
  FeedbackMsg msg;
  msg.row = pkt.dst_router;
  msg.q_next =
      out_port < topo_.p() ? static_cast<double>(host_delivery_) : tables_[router].at(msg.row, out_port - topo_.p());
  return msg;
}

void QRoutingPolicy::apply_feedback(RouterId router, const FeedbackMsg& msg) {
  double& q = tables_[router].at(msg.row, msg.port - topo_.p());
  q = qrouting_update(q, static_cast<double>(msg.reward), msg.q_next, hp_.alpha);
}

}  // namespace dfsim
