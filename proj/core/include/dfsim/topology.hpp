#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfsim {

using RouterId = std::int32_t;
using NodeId = std::int32_t;
using GroupId = std::int32_t;
using PortId = std::int32_t;

inline constexpr PortId kNoPort = -1;

enum class PortKind : std::uint8_t { kHost, kLocal, kGlobal };

const char* to_string(PortKind kind);

// All-to-all Dragonfly shape. p hosts per router, a routers per group,
// h global links per router; one global link per group pair.
struct DragonflyParams {
  int p = 2;
  int a = 4;
  int h = 2;

  int ports() const { return p + a - 1 + h; }
  int groups() const { return a * h + 1; }
  int routers() const { return groups() * a; }
  int nodes() const { return routers() * p; }
  bool balanced() const { return a == 2 * p && a == 2 * h; }

  // Throws std::invalid_argument on bad shapes or 32-bit overflow.
  void validate() const;
};

bool operator==(const DragonflyParams& lhs, const DragonflyParams& rhs);

// Far end of a router port. For host ports `router` is -1 and `node` is set.
struct PortPeer {
  RouterId router = -1;
  PortId port = kNoPort;
  NodeId node = -1;
};

class Topology {
 public:
  explicit Topology(const DragonflyParams& params);

  const DragonflyParams& params() const { return params_; }
  int p() const { return params_.p; }
  int a() const { return params_.a; }
  int h() const { return params_.h; }
  int k() const { return k_; }
  int g() const { return g_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int network_ports() const { return k_ - params_.p; }

  GroupId group_of(RouterId r) const { return r / params_.a; }
  int local_index(RouterId r) const { return r % params_.a; }
  RouterId router_of(NodeId n) const { return n / params_.p; }
  int node_index(NodeId n) const { return n % params_.p; }
  GroupId group_of_node(NodeId n) const { return group_of(router_of(n)); }
  RouterId router_at(GroupId g, int index) const { return g * params_.a + index; }
  NodeId node_at(RouterId r, int index) const { return r * params_.p + index; }

  PortKind kind(PortId port) const;
  PortId first_local_port() const { return params_.p; }
  PortId first_global_port() const { return params_.p + params_.a - 1; }

  // Wiring queries; O(1) and derived from the circulant rule.
  PortPeer peer(RouterId r, PortId port) const;
  PortId local_port_to(RouterId r, RouterId dst) const;
  GroupId global_target(RouterId r, PortId port) const;

  struct Gateway {
    RouterId router;
    PortId port;
  };
  // Router in r's group owning the global link to gdst.
  Gateway gateway_to_group(RouterId r, GroupId gdst) const;

  // First hop of the minimal path toward a router / any router of a group.
  // Returns kNoPort when already there.
  PortId min_port_to_router(RouterId r, RouterId dst) const;
  PortId min_port_to_group(RouterId r, GroupId gdst) const;

  // Unique shortest router-to-router path as the sequence of output ports.
  std::vector<PortId> minimal_path(RouterId src, RouterId dst) const;
  int minimal_hops(RouterId src, RouterId dst) const;

  // Extra columns are appended verbatim to the header and every row.
  void write_csv(std::ostream& out, const std::string& extra_header = "", const std::string& extra_values = "") const;

 private:
  void check_router(RouterId r) const;

  DragonflyParams params_;
  int k_;
  int g_;
  int m_;
  int n_;
};

}  // namespace dfsim
