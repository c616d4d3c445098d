#include "dfsim/topology.hpp"

#include <limits>
#include <ostream>
#include <string>

namespace dfsim {

const char* to_string(PortKind kind) {
  switch (kind) {
    case PortKind::kHost:
      return "host";
    case PortKind::kLocal:
      return "local";
    case PortKind::kGlobal:
      return "global";
  }
  return "?";
}

void DragonflyParams::validate() const {
  if (p < 1 || a < 2 || h < 1) {
    throw std::invalid_argument("dragonfly params need p>=1, a>=2, h>=1 (got p=" + std::to_string(p) +
                                " a=" + std::to_string(a) + " h=" + std::to_string(h) + ")");
  }
  // N = (a*h+1)*a*p must fit in a signed 32-bit id.
  const auto limit = static_cast<long double>(std::numeric_limits<std::int32_t>::max());
  const long double n = (static_cast<long double>(a) * h + 1) * a * p;
  if (n > limit || static_cast<long double>(p) + a + h > limit) {
    throw std::invalid_argument("dragonfly params overflow 32-bit identifiers");
  }
}

bool operator==(const DragonflyParams& lhs, const DragonflyParams& rhs) {
  return lhs.p == rhs.p && lhs.a == rhs.a && lhs.h == rhs.h;
}

Topology::Topology(const DragonflyParams& params) : params_(params) {
  params_.validate();
  k_ = params_.ports();
  g_ = params_.groups();
  m_ = params_.routers();
  n_ = params_.nodes();
}

void Topology::check_router(RouterId r) const {
  if (r < 0 || r >= m_) throw std::out_of_range("router id " + std::to_string(r) + " out of range");
}

PortKind Topology::kind(PortId port) const {
  if (port < params_.p) return PortKind::kHost;
  if (port < first_global_port()) return PortKind::kLocal;
  return PortKind::kGlobal;
}

PortPeer Topology::peer(RouterId r, PortId port) const {
  check_router(r);
  if (port < 0 || port >= k_) throw std::out_of_range("port id " + std::to_string(port) + " out of range");
  PortPeer out;
  switch (kind(port)) {
    case PortKind::kHost:
      out.node = node_at(r, port);
      break;
    case PortKind::kLocal: {
      const int self = local_index(r);
      const int slot = port - params_.p;
      const int other = slot < self ? slot : slot + 1;
      out.router = router_at(group_of(r), other);
      out.port = params_.p + (self < other ? self : self - 1);
      break;
    }
    case PortKind::kGlobal: {
      // Ordinal l on group G reaches group (G+l+1) mod g at ordinal a*h-1-l.
      const int ordinal = local_index(r) * params_.h + (port - first_global_port());
      const GroupId far_group = (group_of(r) + ordinal + 1) % g_;
      const int far_ordinal = params_.a * params_.h - 1 - ordinal;
      out.router = router_at(far_group, far_ordinal / params_.h);
      out.port = first_global_port() + far_ordinal % params_.h;
      break;
    }
  }
  return out;
}

PortId Topology::local_port_to(RouterId r, RouterId dst) const {
  const int self = local_index(r);
  const int other = local_index(dst);
  return params_.p + (other < self ? other : other - 1);
}

GroupId Topology::global_target(RouterId r, PortId port) const {
  const int ordinal = local_index(r) * params_.h + (port - first_global_port());
  return (group_of(r) + ordinal + 1) % g_;
}

Topology::Gateway Topology::gateway_to_group(RouterId r, GroupId gdst) const {
  check_router(r);
  const GroupId src = group_of(r);
  if (gdst < 0 || gdst >= g_) throw std::out_of_range("group id " + std::to_string(gdst) + " out of range");
  if (gdst == src) throw std::logic_error("gateway_to_group: router already in group " + std::to_string(gdst));
  const int ordinal = ((gdst - src - 1) % g_ + g_) % g_;
  return {router_at(src, ordinal / params_.h), first_global_port() + ordinal % params_.h};
}

PortId Topology::min_port_to_router(RouterId r, RouterId dst) const {
  if (r == dst) return kNoPort;
  const GroupId gdst = group_of(dst);
  if (group_of(r) == gdst) return local_port_to(r, dst);
  return min_port_to_group(r, gdst);
}

PortId Topology::min_port_to_group(RouterId r, GroupId gdst) const {
  if (group_of(r) == gdst) return kNoPort;
  const Gateway gw = gateway_to_group(r, gdst);
  return gw.router == r ? gw.port : local_port_to(r, gw.router);
}

std::vector<PortId> Topology::minimal_path(RouterId src, RouterId dst) const {
  check_router(src);
  check_router(dst);
  std::vector<PortId> path;
  RouterId cur = src;
  while (cur != dst) {
    const PortId port = min_port_to_router(cur, dst);
    path.push_back(port);
    cur = peer(cur, port).router;
  }
  return path;
}

int Topology::minimal_hops(RouterId src, RouterId dst) const {
  if (src == dst) return 0;
  const GroupId gs = group_of(src);
  const GroupId gd = group_of(dst);
  if (gs == gd) return 1;
  const Gateway out = gateway_to_group(src, gd);
  const Gateway in = gateway_to_group(dst, gs);
  return 1 + (out.router != src) + (in.router != dst);
}

void Topology::write_csv(std::ostream& out, const std::string& extra_header, const std::string& extra_values) const {
  out << "router,port,kind,peer_router,peer_port" << extra_header << '\n';
  for (RouterId r = 0; r < m_; ++r) {
    for (PortId port = 0; port < k_; ++port) {
      const PortPeer far = peer(r, port);
      out << r << ',' << port << ',' << to_string(kind(port)) << ',';
      if (far.router >= 0) {
        out << far.router << ',' << far.port;
      } else {
        // Host ports: peer_router is -1 and peer_port carries the node id.
        out << -1 << ',' << far.node;
      }
      out << extra_values << '\n';
    }
  }
}

}  // namespace dfsim
