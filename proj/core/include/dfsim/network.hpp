#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "dfsim/engine.hpp"
#include "dfsim/packet.hpp"
#include "dfsim/router_state.hpp"
#include "dfsim/routing.hpp"
#include "dfsim/topology.hpp"

namespace dfsim {

struct NetworkStats {
  std::int64_t injected = 0;
  std::int64_t delivered = 0;
  std::int64_t link_departures = 0;   // router-to-router transmissions
  std::int64_t router_arrivals = 0;   // arrivals over router-to-router links
  std::int64_t crossings_from_routers = 0;
  std::int64_t feedback_sent = 0;
  std::int64_t feedback_applied = 0;
  std::int64_t hop_cap_violations = 0;
  int max_hops = 0;
};

// Routers, end nodes and the links between them. Input VC buffers feed
// per-VC output queues through an ideal crossbar; a packet leaves its input
// buffer only when the output queue has room, which returns a credit (and,
// for learning policies, a feedback report) to the upstream hop.
class Network {
 public:
  using DeliveryCallback = std::function<void(const Packet&, TimeNs)>;

  Network(const Topology& topo, const TimingParams& timing, const RoutingSpec& spec, RoutingPolicy& policy,
          Engine& engine);

  void on_delivery(DeliveryCallback cb) { deliver_cb_ = std::move(cb); }
  void enable_trace(bool on) { trace_ = on; }

  // Appends a generated packet to the node's source queue at engine.now().
  void enqueue(NodeId src, NodeId dst, TimeNs gen_time);

  // LinkArrival, TryForward, CreditReturn and FeedbackArrival.
  void handle(const Event& e);

  const Topology& topology() const { return topo_; }
  const TimingParams& timing() const { return timing_; }
  const RouterState& router(RouterId r) const { return routers_[r]; }
  RouterState& router(RouterId r) { return routers_[r]; }
  const Packet& packet(std::int32_t slot) const { return pool_[slot]; }
  const NetworkStats& stats() const { return stats_; }
  int vcs() const { return vcs_; }

  std::int64_t in_network() const { return pool_.live(); }
  std::int64_t source_backlog() const { return backlog_; }
  std::int64_t node_backlog(NodeId n) const { return static_cast<std::int64_t>(nodes_[n].backlog.size()); }

  // Checks credits + wire + downstream occupancy + returning credits against
  // the buffer depth on every link and VC; returns the number of violations.
  std::int64_t audit_credits() const;

 private:
  struct SourceEntry {
    TimeNs gen_time;
    NodeId dst;
  };
  struct NodeState {
    std::deque<SourceEntry> backlog;
    TimeNs busy_until = 0;
    std::int32_t credits = 0;
    std::int32_t link_packets = 0;
    std::int32_t credits_returning = 0;
    bool wake_pending = false;
  };

  const PortPeer& peer(RouterId r, PortId port) const { return peers_[static_cast<std::size_t>(r) * topo_.k() + port]; }

  void on_router_arrival(RouterId r, PortId in_port, int vc, std::int32_t slot);
  void on_node_arrival(NodeId n, std::int32_t slot);
  void route_head(RouterId r, int in_slot);
  void cross(RouterId r, int in_slot);
  void grant_waiters(RouterId r, int out_slot);
  void try_send(RouterId r, PortId out);
  void wake(RouterId r, PortId out, TimeNs at);
  void try_inject(NodeId n);
  void wake_node(NodeId n, TimeNs at);

  const Topology& topo_;
  TimingParams timing_;
  RoutingSpec spec_;
  RoutingPolicy& policy_;
  Engine& engine_;
  TimeNs ser_ns_;
  int vcs_;
  int hop_cap_;
  bool learns_;
  bool trace_ = false;

  std::vector<PortPeer> peers_;
  std::vector<RouterState> routers_;
  std::vector<NodeState> nodes_;
  PacketPool pool_;
  std::int64_t next_packet_id_ = 0;
  std::int64_t backlog_ = 0;
  NetworkStats stats_;
  DeliveryCallback deliver_cb_;
};

}  // namespace dfsim
