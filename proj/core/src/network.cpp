#include "dfsim/network.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace dfsim {

Network::Network(const Topology& topo, const TimingParams& timing, const RoutingSpec& spec, RoutingPolicy& policy,
                 Engine& engine)
    : topo_(topo),
      timing_(timing),
      spec_(spec),
      policy_(policy),
      engine_(engine),
      ser_ns_(timing.serialization_ns()),
      vcs_(spec.vc_count()),
      hop_cap_(spec.hop_cap()),
      learns_(policy.learns()) {
  timing_.validate();
  peers_.reserve(static_cast<std::size_t>(topo.m()) * topo.k());
  for (RouterId r = 0; r < topo.m(); ++r) {
    for (PortId port = 0; port < topo.k(); ++port) peers_.push_back(topo.peer(r, port));
  }
  routers_.reserve(static_cast<std::size_t>(topo.m()));
  for (RouterId r = 0; r < topo.m(); ++r) {
    routers_.emplace_back(topo.k(), topo.p(), vcs_, timing.vc_buffer, timing.output_buffer);
  }
  nodes_.resize(static_cast<std::size_t>(topo.n()));
  for (NodeState& node : nodes_) node.credits = timing.vc_buffer;
}

void Network::enqueue(NodeId src, NodeId dst, TimeNs gen_time) {
  nodes_[src].backlog.push_back({gen_time, dst});
  ++backlog_;
  try_inject(src);
}

void Network::handle(const Event& e) {
  switch (e.kind) {
    case EventKind::kLinkArrival:
      if (e.to_node) {
        on_node_arrival(e.target, e.index);
      } else {
        on_router_arrival(e.target, e.port, e.vc, e.index);
      }
      break;
    case EventKind::kTryForward:
      if (e.to_node) {
        nodes_[e.target].wake_pending = false;
        try_inject(e.target);
      } else {
        routers_[e.target].wake_pending[e.port] = 0;
        try_send(e.target, e.port);
      }
      break;
    case EventKind::kCreditReturn:
      if (e.to_node) {
        NodeState& node = nodes_[e.target];
        ++node.credits;
        --node.credits_returning;
        try_inject(e.target);
      } else {
        RouterState& st = routers_[e.target];
        const int s = st.slot(e.port, e.vc);
        ++st.credits[s];
        --st.credits_returning[s];
        --st.used_credits[e.port];
        try_send(e.target, e.port);
      }
      break;
    case EventKind::kFeedbackArrival: {
      FeedbackMsg msg;
      msg.row = e.index;
      msg.port = e.port;
      msg.reward = e.word;
      msg.q_next = e.value;
      policy_.apply_feedback(e.target, msg);
      ++stats_.feedback_applied;
      break;
    }
    default:
      throw SimulationError(std::string("network cannot handle event ") + to_string(e.kind));
  }
}

void Network::on_router_arrival(RouterId r, PortId in_port, int vc, std::int32_t slot) {
  RouterState& st = routers_[r];
  const int s = st.slot(in_port, vc);
  if (st.input.full(s)) {
    throw SimulationError("input buffer overflow at router " + std::to_string(r) + " port " +
                          std::to_string(in_port) + " vc " + std::to_string(vc));
  }
  Packet& pkt = pool_[slot];
  pkt.prev_arrival_time = pkt.arrival_time;
  pkt.arrival_time = engine_.now();
  pkt.vc = static_cast<std::uint8_t>(vc);
  pkt.routed = false;
  if (in_port < topo_.p()) {
    --nodes_[topo_.node_at(r, in_port)].link_packets;
  } else {
    const PortPeer& up = peer(r, in_port);
    --routers_[up.router].link_packets[st.slot(up.port, vc)];
    ++stats_.router_arrivals;
    if (topo_.kind(in_port) == PortKind::kGlobal) {
      pkt.phase.left_source_group = true;
      const GroupId here = topo_.group_of(r);
      if (here != pkt.dst_group && here != pkt.src_group && !pkt.phase.entered_intermediate) {
        pkt.phase.entered_intermediate = true;
        pkt.phase.first_intermediate = true;
      }
    }
  }
  if (trace_ && pkt.path_len < kMaxTracedHops) pkt.path[pkt.path_len++] = r;
  st.input.push(s, slot);
  if (st.input.size(s) == 1) route_head(r, s);
}

void Network::on_node_arrival(NodeId n, std::int32_t slot) {
  const Packet& pkt = pool_[slot];
  (void)n;
  ++stats_.delivered;
  if (pkt.hops > hop_cap_) ++stats_.hop_cap_violations;
  stats_.max_hops = std::max<int>(stats_.max_hops, pkt.hops);
  if (deliver_cb_) deliver_cb_(pkt, engine_.now());
  pool_.release(slot);
}

void Network::route_head(RouterId r, int in_slot) {
  RouterState& st = routers_[r];
  Packet& pkt = pool_[st.input.front(in_slot)];
  if (!pkt.routed) {
    PortId out;
    if (pkt.dst_router == r) {
      out = topo_.node_index(pkt.dst_node);
    } else {
      const RouteContext ctx{topo_, r, in_slot / st.vcs, st, engine_.now()};
      out = policy_.route(pkt, ctx);
      if (out < topo_.p() || out >= topo_.k()) {
        throw SimulationError("routing returned invalid port " + std::to_string(out) + " at router " +
                              std::to_string(r));
      }
    }
    int out_vc = 0;
    if (out >= topo_.p()) {
      // Hop-index VC assignment; a packet past the cap stays on the last VC.
      out_vc = std::min<int>(pkt.hops, vcs_ - 1);
    }
    pkt.out_port = out;
    pkt.out_vc = static_cast<std::uint8_t>(out_vc);
    pkt.routed = true;
  }
  const int os = st.slot(pkt.out_port, pkt.out_vc);
  if (st.output.full(os) || st.wait_head[os] != -1) {
    st.wait_next[in_slot] = -1;
    if (st.wait_tail[os] == -1) {
      st.wait_head[os] = in_slot;
    } else {
      st.wait_next[st.wait_tail[os]] = in_slot;
    }
    st.wait_tail[os] = in_slot;
    ++st.waiting[pkt.out_port];
    return;
  }
  cross(r, in_slot);
}

void Network::cross(RouterId r, int in_slot) {
  RouterState& st = routers_[r];
  const std::int32_t slot = st.input.pop(in_slot);
  Packet& pkt = pool_[slot];
  const PortId in_port = in_slot / st.vcs;
  const int in_vc = in_slot % st.vcs;
  const PortId out = pkt.out_port;
  const TimeNs now = engine_.now();

  Event credit;
  credit.kind = EventKind::kCreditReturn;
  if (in_port < topo_.p()) {
    const NodeId n = topo_.node_at(r, in_port);
    ++nodes_[n].credits_returning;
    credit.time = now + timing_.host_latency_ns;
    credit.to_node = true;
    credit.target = n;
    engine_.schedule(credit);
  } else {
    const PortPeer& up = peer(r, in_port);
    const TimeNs back = now + timing_.latency(topo_.kind(in_port));
    ++routers_[up.router].credits_returning[st.slot(up.port, in_vc)];
    credit.time = back;
    credit.target = up.router;
    credit.port = static_cast<std::int16_t>(up.port);
    credit.vc = static_cast<std::uint8_t>(in_vc);
    engine_.schedule(credit);
    ++stats_.crossings_from_routers;
    if (learns_) {
      const FeedbackMsg msg = policy_.make_feedback(r, pkt, out);
      Event fb;
      fb.kind = EventKind::kFeedbackArrival;
      fb.time = back;
      fb.target = up.router;
      fb.port = static_cast<std::int16_t>(up.port);
      fb.index = msg.row;
      fb.word = pkt.arrival_time - pkt.prev_arrival_time;
      fb.value = msg.q_next;
      engine_.schedule(fb);
      ++stats_.feedback_sent;
    }
  }

  if (out >= topo_.p()) {
    pkt.vc = pkt.out_vc;
    ++pkt.hops;
  }
  pkt.ready_time = now + timing_.router_latency_ns;
  pkt.in_slot = in_slot;
  st.output.push(st.slot(out, pkt.out_vc), slot);
  ++st.out_occupancy[out];
  try_send(r, out);
  if (!st.input.empty(in_slot)) route_head(r, in_slot);
}

void Network::grant_waiters(RouterId r, int out_slot) {
  RouterState& st = routers_[r];
  while (!st.output.full(out_slot) && st.wait_head[out_slot] != -1) {
    const int in_slot = st.wait_head[out_slot];
    st.wait_head[out_slot] = st.wait_next[in_slot];
    if (st.wait_head[out_slot] == -1) st.wait_tail[out_slot] = -1;
    --st.waiting[out_slot / st.vcs];
    cross(r, in_slot);
  }
}

void Network::try_send(RouterId r, PortId out) {
  RouterState& st = routers_[r];
  const TimeNs now = engine_.now();
  if (st.busy_until[out] > now) {
    wake(r, out, st.busy_until[out]);
    return;
  }
  const bool to_host = out < topo_.p();
  // Round-robin over the (input port, vc) requesters at the VC heads: the
  // winner is the first at or after the rotating pointer.
  const int inputs = st.ports * st.vcs;
  int chosen = -1;
  int best_dist = inputs;
  TimeNs earliest = std::numeric_limits<TimeNs>::max();
  for (int vc = 0; vc < st.vcs; ++vc) {
    const int os = st.slot(out, vc);
    if (st.output.empty(os)) continue;
    const Packet& head = pool_[st.output.front(os)];
    if (head.ready_time > now) {
      earliest = std::min(earliest, head.ready_time);
      continue;
    }
    if (!to_host && st.credits[os] <= 0) continue;
    const int dist = (head.in_slot - st.rr_next[out] + inputs) % inputs;
    if (dist < best_dist) {
      best_dist = dist;
      chosen = vc;
    }
  }
  if (chosen < 0) {
    if (earliest != std::numeric_limits<TimeNs>::max()) wake(r, out, earliest);
    return;
  }
  st.rr_next[out] = (pool_[st.output.front(st.slot(out, chosen))].in_slot + 1) % inputs;
  const int os = st.slot(out, chosen);
  const std::int32_t slot = st.output.pop(os);
  --st.out_occupancy[out];
  st.busy_until[out] = now + ser_ns_;

  Event arrival;
  arrival.kind = EventKind::kLinkArrival;
  arrival.index = slot;
  if (to_host) {
    arrival.time = now + ser_ns_ + timing_.host_latency_ns;
    arrival.to_node = true;
    arrival.target = topo_.node_at(r, out);
  } else {
    --st.credits[os];
    ++st.used_credits[out];
    ++st.link_packets[os];
    const PortPeer& down = peer(r, out);
    arrival.time = now + ser_ns_ + timing_.latency(topo_.kind(out));
    arrival.target = down.router;
    arrival.port = static_cast<std::int16_t>(down.port);
    arrival.vc = static_cast<std::uint8_t>(chosen);
    ++stats_.link_departures;
  }
  engine_.schedule(arrival);
  grant_waiters(r, os);
  if (st.out_occupancy[out] > 0) wake(r, out, st.busy_until[out]);
}

void Network::wake(RouterId r, PortId out, TimeNs at) {
  RouterState& st = routers_[r];
  if (st.wake_pending[out]) return;
  st.wake_pending[out] = 1;
  Event e;
  e.kind = EventKind::kTryForward;
  e.time = at;
  e.target = r;
  e.port = static_cast<std::int16_t>(out);
  engine_.schedule(e);
}

void Network::try_inject(NodeId n) {
  NodeState& node = nodes_[n];
  if (node.backlog.empty()) return;
  const TimeNs now = engine_.now();
  if (node.busy_until > now) {
    wake_node(n, node.busy_until);
    return;
  }
  if (node.credits <= 0) return;
  const SourceEntry entry = node.backlog.front();
  node.backlog.pop_front();
  --backlog_;

  const std::int32_t slot = pool_.allocate();
  Packet& pkt = pool_[slot];
  pkt.id = next_packet_id_++;
  pkt.src_node = n;
  pkt.dst_node = entry.dst;
  pkt.src_router = topo_.router_of(n);
  pkt.dst_router = topo_.router_of(entry.dst);
  pkt.src_group = topo_.group_of(pkt.src_router);
  pkt.dst_group = topo_.group_of(pkt.dst_router);
  pkt.src_local = static_cast<std::int16_t>(topo_.node_index(n));
  pkt.gen_time = entry.gen_time;
  pkt.arrival_time = now;
  ++stats_.injected;

  --node.credits;
  ++node.link_packets;
  node.busy_until = now + ser_ns_;
  Event arrival;
  arrival.kind = EventKind::kLinkArrival;
  arrival.time = now + ser_ns_ + timing_.host_latency_ns;
  arrival.target = pkt.src_router;
  arrival.port = static_cast<std::int16_t>(pkt.src_local);
  arrival.vc = 0;
  arrival.index = slot;
  engine_.schedule(arrival);
  if (!node.backlog.empty()) wake_node(n, node.busy_until);
}

void Network::wake_node(NodeId n, TimeNs at) {
  NodeState& node = nodes_[n];
  if (node.wake_pending) return;
  node.wake_pending = true;
  Event e;
  e.kind = EventKind::kTryForward;
  e.time = at;
  e.to_node = true;
  e.target = n;
  engine_.schedule(e);
}

std::int64_t Network::audit_credits() const {
  std::int64_t violations = 0;
  const int cap = timing_.vc_buffer;
  for (RouterId r = 0; r < topo_.m(); ++r) {
    const RouterState& st = routers_[r];
    for (PortId out = topo_.p(); out < topo_.k(); ++out) {
      const PortPeer& down = peer(r, out);
      const RouterState& ds = routers_[down.router];
      int used = 0;
      for (int vc = 0; vc < vcs_; ++vc) {
        const int s = st.slot(out, vc);
        const int credits = st.credits[s];
        used += cap - credits;
        const int total = credits + st.link_packets[s] + ds.input.size(ds.slot(down.port, vc)) + st.credits_returning[s];
        if (credits < 0 || credits > cap || total != cap) ++violations;
      }
      if (used != st.used_credits[out]) ++violations;
    }
  }
  for (NodeId n = 0; n < topo_.n(); ++n) {
    const NodeState& node = nodes_[n];
    const RouterState& st = routers_[topo_.router_of(n)];
    const int total =
        node.credits + node.link_packets + st.input.size(st.slot(topo_.node_index(n), 0)) + node.credits_returning;
    if (node.credits < 0 || node.credits > cap || total != cap) ++violations;
  }
  return violations;
}

}  // namespace dfsim
