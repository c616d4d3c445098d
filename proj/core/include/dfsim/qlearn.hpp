#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dfsim/routing.hpp"

namespace dfsim {

// Dense table of estimated delivery times (ns), one column per non-host port.
class QTable {
 public:
  QTable() = default;
  QTable(int rows, int cols, double init = 0.0) : rows_(rows), cols_(cols), values_(rows * cols, init) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t entries() const { return values_.size(); }

  double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * cols_ + col]; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * cols_ + col]; }

  // Column with the smallest value; lowest index wins ties.
  int argmin(int row) const;
  double min(int row) const { return at(row, argmin(row)); }

  // One `<prefix>row,port,value` line per entry.
  void write_csv(std::ostream& out, const std::string& prefix) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

// Rows keyed by (destination group, source node index): g*p rows.
class TwoLevelQTable : public QTable {
 public:
  TwoLevelQTable() = default;
  explicit TwoLevelQTable(const Topology& topo) : QTable(topo.g() * topo.p(), topo.network_ports()), p_(topo.p()) {}

  int row_of(GroupId dst_group, int src_local) const { return dst_group * p_ + src_local; }

 private:
  int p_ = 1;
};

// Rows keyed by destination router: m rows.
class LegacyQTable : public QTable {
 public:
  LegacyQTable() = default;
  explicit LegacyQTable(const Topology& topo) : QTable(topo.m(), topo.network_ports()) {}
};

// Minimal-path bias: keep min_port unless the best port is better by at
// least `threshold` relative to q_min.
PortId select_temp_port(double q_min, double q_best, PortId min_port, PortId best_port, double threshold);

// Two-rate update toward reward + q_next.
double hysteretic_update(double q, double reward, double q_next, double alpha, double beta);
// Single-rate update used by legacy Q-routing.
double qrouting_update(double q, double reward, double q_next, double alpha);

// Zero-load time from arrival at the destination router to delivery.
TimeNs host_delivery_ns(const TimingParams& timing);

// Zero-load initialization from congestion-free minimal delivery times.
void q_init(TwoLevelQTable& table, const Topology& topo, RouterId router, const TimingParams& timing);
void q_init(LegacyQTable& table, const Topology& topo, RouterId router, const TimingParams& timing);

class QAdaptivePolicy final : public RoutingPolicy {
 public:
  QAdaptivePolicy(const Topology& topo, const QHyperParams& hp, const TimingParams& timing, std::uint64_t seed);

  RoutingTag tag() const override { return RoutingTag::kQAdaptive; }
  PortId route(Packet& pkt, const RouteContext& ctx) override;
  bool learns() const override { return true; }
  FeedbackMsg make_feedback(RouterId router, const Packet& pkt, PortId out_port) const override;
  void apply_feedback(RouterId router, const FeedbackMsg& msg) override;

  const TwoLevelQTable& table(RouterId r) const { return tables_[r]; }
  TwoLevelQTable& table(RouterId r) { return tables_[r]; }
  const QHyperParams& hyper_params() const { return hp_; }
  std::uint64_t updates() const { return updates_; }

 private:
  PortId route_at_source(Packet& pkt, const RouteContext& ctx);
  PortId route_at_intermediate(Packet& pkt, const RouteContext& ctx);

  const Topology& topo_;
  QHyperParams hp_;
  TimeNs host_delivery_;
  std::vector<TwoLevelQTable> tables_;
  std::vector<RngStream> explore_;
  std::uint64_t updates_ = 0;
};

// Per-destination-router Q-routing with a maxQ hop threshold after which
// packets are routed minimally.
class QRoutingPolicy final : public RoutingPolicy {
 public:
  QRoutingPolicy(const Topology& topo, const QHyperParams& hp, int maxq, const TimingParams& timing,
                 std::uint64_t seed);

  RoutingTag tag() const override { return RoutingTag::kQRouting; }
  PortId route(Packet& pkt, const RouteContext& ctx) override;
  bool learns() const override { return true; }
  FeedbackMsg make_feedback(RouterId router, const Packet& pkt, PortId out_port) const override;
  void apply_feedback(RouterId router, const FeedbackMsg& msg) override;

  const LegacyQTable& table(RouterId r) const { return tables_[r]; }
  LegacyQTable& table(RouterId r) { return tables_[r]; }
  int maxq() const { return maxq_; }

 private:
  const Topology& topo_;
  QHyperParams hp_;
  int maxq_;
  TimeNs host_delivery_;
  std::vector<LegacyQTable> tables_;
  std::vector<RngStream> explore_;
};

}  // namespace dfsim
