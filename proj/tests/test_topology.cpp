#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <vector>

#include "dfsim/topology.hpp"

using namespace dfsim;

namespace {

// Router adjacency built only from peer(), each edge tagged global or not.
std::vector<std::vector<std::pair<RouterId, bool>>> adjacency(const Topology& t) {
  std::vector<std::vector<std::pair<RouterId, bool>>> adj(t.m());
  for (RouterId r = 0; r < t.m(); ++r) {
    for (PortId port = t.p(); port < t.k(); ++port) {
      adj[r].push_back({t.peer(r, port).router, t.kind(port) == PortKind::kGlobal});
    }
  }
  return adj;
}

// Shortest distances over paths that cross at most one global link: the
// Dragonfly notion of a minimal route. Plain shortest paths can be shorter
// by chaining two global links through a third group.
std::vector<int> bfs(const std::vector<std::vector<std::pair<RouterId, bool>>>& adj, RouterId src) {
  const auto n = adj.size();
  std::vector<int> dist(2 * n, -1);  // state: router + 0/1 global links used
  std::queue<std::size_t> todo;
  dist[src] = 0;
  todo.push(src);
  while (!todo.empty()) {
    const std::size_t state = todo.front();
    todo.pop();
    const std::size_t r = state % n;
    const bool used = state >= n;
    for (const auto& [next, global] : adj[r]) {
      if (used && global) continue;
      const std::size_t to = static_cast<std::size_t>(next) + ((used || global) ? n : 0);
      if (dist[to] < 0) {
        dist[to] = dist[state] + 1;
        todo.push(to);
      }
    }
  }
  std::vector<int> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    out[r] = dist[r] < 0 ? dist[r + n] : (dist[r + n] < 0 ? dist[r] : std::min(dist[r], dist[r + n]));
  }
  return out;
}

const DragonflyParams kDesk{2, 4, 2};
const DragonflyParams k1056{4, 8, 4};
const DragonflyParams k2550{5, 10, 5};

}  // namespace

TEST(Topology, DerivedSizesMatchTable) {
  struct Row {
    DragonflyParams params;
    int k, g, m, n;
  };
  for (const Row& row : {Row{k1056, 15, 33, 264, 1056}, Row{k2550, 19, 51, 510, 2550},
                         Row{kDesk, 7, 9, 36, 72}}) {
    const Topology t(row.params);
    EXPECT_EQ(t.k(), row.k);
    EXPECT_EQ(t.g(), row.g);
    EXPECT_EQ(t.m(), row.m);
    EXPECT_EQ(t.n(), row.n);
    EXPECT_TRUE(row.params.balanced());
  }
}

TEST(Topology, RejectsBadShapes) {
  EXPECT_THROW(Topology(DragonflyParams{0, 4, 2}), std::invalid_argument);
  EXPECT_THROW(Topology(DragonflyParams{2, 1, 2}), std::invalid_argument);
  EXPECT_THROW(Topology(DragonflyParams{2, 4, 0}), std::invalid_argument);
  EXPECT_THROW(Topology(DragonflyParams{100000, 100000, 100000}), std::invalid_argument);
}

TEST(Topology, PortLayout) {
  const Topology t(kDesk);
  EXPECT_EQ(t.kind(0), PortKind::kHost);
  EXPECT_EQ(t.kind(1), PortKind::kHost);
  for (PortId port = 2; port < 5; ++port) EXPECT_EQ(t.kind(port), PortKind::kLocal);
  EXPECT_EQ(t.kind(5), PortKind::kGlobal);
  EXPECT_EQ(t.kind(6), PortKind::kGlobal);
}

TEST(Topology, WiringIsSymmetric) {
  for (const DragonflyParams& params : {kDesk, k1056, DragonflyParams{3, 5, 2}}) {
    const Topology t(params);
    for (RouterId r = 0; r < t.m(); ++r) {
      for (PortId port = t.p(); port < t.k(); ++port) {
        const PortPeer far = t.peer(r, port);
        ASSERT_GE(far.router, 0);
        ASSERT_NE(far.router, r);
        EXPECT_EQ(t.kind(far.port), t.kind(port));
        const PortPeer back = t.peer(far.router, far.port);
        EXPECT_EQ(back.router, r);
        EXPECT_EQ(back.port, port);
      }
    }
  }
}

TEST(Topology, HostPortsReachTheirNodes) {
  const Topology t(kDesk);
  for (RouterId r = 0; r < t.m(); ++r) {
    for (PortId port = 0; port < t.p(); ++port) {
      const NodeId n = t.peer(r, port).node;
      EXPECT_EQ(t.router_of(n), r);
      EXPECT_EQ(t.node_index(n), port);
    }
  }
}

TEST(Topology, LocalLinksFormCliques) {
  const Topology t(k1056);
  for (RouterId r = 0; r < t.m(); ++r) {
    std::set<RouterId> seen;
    for (PortId port = t.first_local_port(); port < t.first_global_port(); ++port) {
      const RouterId other = t.peer(r, port).router;
      EXPECT_EQ(t.group_of(other), t.group_of(r));
      seen.insert(other);
    }
    EXPECT_EQ(static_cast<int>(seen.size()), t.a() - 1);
  }
}

TEST(Topology, ExactlyOneGlobalLinkPerGroupPair) {
  for (const DragonflyParams& params : {kDesk, k1056, k2550}) {
    const Topology t(params);
    std::map<std::pair<GroupId, GroupId>, int> links;
    for (RouterId r = 0; r < t.m(); ++r) {
      for (PortId port = t.first_global_port(); port < t.k(); ++port) {
        const GroupId there = t.group_of(t.peer(r, port).router);
        EXPECT_EQ(there, t.global_target(r, port));
        ++links[{t.group_of(r), there}];
      }
    }
    EXPECT_EQ(static_cast<int>(links.size()), t.g() * (t.g() - 1));
    for (const auto& [pair, count] : links) {
      EXPECT_NE(pair.first, pair.second);
      EXPECT_EQ(count, 1);
    }
  }
}

TEST(Topology, GatewayExample) {
  const Topology t(kDesk);
  const Topology::Gateway gw = t.gateway_to_group(t.router_at(0, 0), 1);
  EXPECT_EQ(gw.router, t.router_at(0, 0));
  EXPECT_EQ(gw.port, t.first_global_port());
  EXPECT_THROW(t.gateway_to_group(0, 0), std::logic_error);
}

TEST(Topology, GatewayOwnsTheLink) {
  const Topology t(k1056);
  for (RouterId r = 0; r < t.m(); ++r) {
    for (GroupId g = 0; g < t.g(); ++g) {
      if (g == t.group_of(r)) continue;
      const Topology::Gateway gw = t.gateway_to_group(r, g);
      EXPECT_EQ(t.group_of(gw.router), t.group_of(r));
      EXPECT_EQ(t.group_of(t.peer(gw.router, gw.port).router), g);
    }
  }
}

TEST(Topology, MinimalHopsMatchBfsOracle) {
  for (const DragonflyParams& params : {kDesk, DragonflyParams{2, 4, 1}, DragonflyParams{3, 6, 3}}) {
    const Topology t(params);
    const auto adj = adjacency(t);
    int diameter = 0;
    for (RouterId s = 0; s < t.m(); ++s) {
      const std::vector<int> dist = bfs(adj, s);
      for (RouterId d = 0; d < t.m(); ++d) {
        ASSERT_EQ(t.minimal_hops(s, d), dist[d]) << s << "->" << d;
        diameter = std::max(diameter, dist[d]);
      }
    }
    EXPECT_EQ(diameter, 3);
  }
}

TEST(Topology, MinimalPathWalksToDestination) {
  const Topology t(k1056);
  for (RouterId s = 0; s < t.m(); s += 7) {
    for (RouterId d = 0; d < t.m(); ++d) {
      const std::vector<PortId> path = t.minimal_path(s, d);
      EXPECT_EQ(static_cast<int>(path.size()), t.minimal_hops(s, d));
      RouterId cur = s;
      int globals = 0;
      for (PortId port : path) {
        globals += t.kind(port) == PortKind::kGlobal;
        cur = t.peer(cur, port).router;
      }
      EXPECT_EQ(cur, d);
      EXPECT_LE(globals, 1);
    }
  }
}

TEST(Topology, MinPortToGroup) {
  const Topology t(kDesk);
  for (RouterId r = 0; r < t.m(); ++r) {
    EXPECT_EQ(t.min_port_to_group(r, t.group_of(r)), kNoPort);
    for (GroupId g = 0; g < t.g(); ++g) {
      if (g == t.group_of(r)) continue;
      const PortId port = t.min_port_to_group(r, g);
      const RouterId next = t.peer(r, port).router;
      if (t.kind(port) == PortKind::kGlobal) {
        EXPECT_EQ(t.group_of(next), g);
      } else {
        EXPECT_EQ(next, t.gateway_to_group(r, g).router);
      }
    }
  }
}

TEST(Topology, CsvListsEveryPort) {
  const Topology t(kDesk);
  std::ostringstream out;
  t.write_csv(out, ",tag", ",x");
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "router,port,kind,peer_router,peer_port,tag");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.size() - 2), ",x");
  }
  EXPECT_EQ(rows, t.m() * t.k());
}
