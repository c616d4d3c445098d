#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "dfsim/qlearn.hpp"
#include "dfsim/simulation.hpp"
#include "support.hpp"

using namespace dfsim;
using dfsim::testing::desk;

namespace {

const DragonflyParams kDesk{2, 4, 2};

// Zero-load travel time from every router to the nearest router of `group`,
// over links weighted by serialization + propagation.
std::vector<TimeNs> dijkstra_to_group(const Topology& t, const TimingParams& timing, GroupId group) {
  std::vector<TimeNs> dist(t.m(), std::numeric_limits<TimeNs>::max());
  using Item = std::pair<TimeNs, RouterId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> todo;
  for (int i = 0; i < t.a(); ++i) {
    dist[t.router_at(group, i)] = 0;
    todo.push({0, t.router_at(group, i)});
  }
  while (!todo.empty()) {
    const auto [d, r] = todo.top();
    todo.pop();
    if (d != dist[r]) continue;
    // Links are symmetric, so relaxing outgoing edges gives distances to the group.
    for (PortId port = t.p(); port < t.k(); ++port) {
      const RouterId n = t.peer(r, port).router;
      const TimeNs nd = d + timing.link_time(t.kind(port));
      if (nd < dist[n]) {
        dist[n] = nd;
        todo.push({nd, n});
      }
    }
  }
  return dist;
}

// Hop counts reachable by any combination of source-router and
// intermediate-group choices, each followed by minimal routing.
std::set<int> enumerate_qadaptive_hops(const Topology& t, RouterId s, RouterId d) {
  std::set<int> out;
  const GroupId dg = t.group_of(d);
  if (t.group_of(s) == dg) {
    out.insert(t.minimal_hops(s, d));
    return out;
  }
  for (PortId first = t.p(); first < t.k(); ++first) {
    const RouterId next = t.peer(s, first).router;
    const GroupId ng = t.group_of(next);
    if (ng == dg || t.kind(first) == PortKind::kLocal) {
      out.insert(1 + t.minimal_hops(next, d));
      continue;
    }
    // Entered an intermediate group.
    if (t.gateway_to_group(next, dg).router == next) {
      out.insert(1 + t.minimal_hops(next, d));
      continue;
    }
    for (PortId local = t.first_local_port(); local < t.first_global_port(); ++local) {
      out.insert(2 + t.minimal_hops(t.peer(next, local).router, d));
    }
  }
  return out;
}

std::vector<QTable> snapshot(QAdaptivePolicy& policy, const Topology& t) {
  std::vector<QTable> out;
  for (RouterId r = 0; r < t.m(); ++r) out.push_back(policy.table(r));
  return out;
}

}  // namespace

TEST(QLearn, HystereticUpdateExamples) {
  EXPECT_DOUBLE_EQ(hysteretic_update(400, 50, 300, 0.2, 0.04), 390.0);
  EXPECT_DOUBLE_EQ(hysteretic_update(300, 50, 300, 0.2, 0.04), 302.0);
  for (double q : {0.0, 17.5, 1e6}) {
    EXPECT_DOUBLE_EQ(hysteretic_update(q, 0, q, 0.7, 0.3), q);
  }
}

TEST(QLearn, LegacyUpdateExample) { EXPECT_DOUBLE_EQ(qrouting_update(400, 50, 300, 0.2), 390.0); }

TEST(QLearn, ThresholdSelection) {
  EXPECT_EQ(select_temp_port(300, 300, 3, 5, 0.2), 3);
  EXPECT_EQ(select_temp_port(300, 200, 3, 5, 0.2), 5);
  EXPECT_EQ(select_temp_port(300, 400, 3, 5, 0.0), 3);
  EXPECT_EQ(select_temp_port(0, 0, 3, 5, 0.0), 3);
  // Just below and at the threshold.
  EXPECT_EQ(select_temp_port(1000, 801, 3, 5, 0.2), 3);
  EXPECT_EQ(select_temp_port(1000, 800, 3, 5, 0.2), 5);
}

TEST(QLearn, NonNegativeUnderRandomUpdates) {
  RngStream rng(77, StreamTag::kSetup, 0);
  QTable table(16, 5, 0.0);
  for (int i = 0; i < 16 * 5; ++i) table.at(i / 5, i % 5) = rng.uniform01() * 1000.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const int row = static_cast<int>(rng.below(16));
    const int col = static_cast<int>(rng.below(5));
    const double reward = rng.uniform01() * 5000.0 * (rng.below(10) == 0 ? 0.0 : 1.0);
    const double q_next = rng.uniform01() * 5000.0;
    const double alpha = rng.uniform01();
    const double beta = rng.uniform01();
    double& q = table.at(row, col);
    q = (i % 2) ? hysteretic_update(q, reward, q_next, alpha, beta) : qrouting_update(q, reward, q_next, alpha);
    ASSERT_GE(q, 0.0) << "update " << i;
  }
}

TEST(QLearn, TableSizes) {
  for (const DragonflyParams& params : {kDesk, DragonflyParams{4, 8, 4}, DragonflyParams{5, 10, 5}}) {
    const Topology t(params);
    const TwoLevelQTable two(t);
    const LegacyQTable legacy(t);
    EXPECT_EQ(two.rows(), t.g() * t.p());
    EXPECT_EQ(two.cols(), t.k() - t.p());
    EXPECT_EQ(legacy.rows(), t.m());
    EXPECT_EQ(legacy.cols(), t.k() - t.p());
    EXPECT_EQ(2 * two.entries(), legacy.entries());
  }
}

TEST(QLearn, RowLayout) {
  const Topology t(kDesk);
  const TwoLevelQTable table(t);
  EXPECT_EQ(table.row_of(0, 0), 0);
  EXPECT_EQ(table.row_of(3, 1), 7);
  EXPECT_EQ(table.row_of(8, 1), table.rows() - 1);
}

TEST(QLearn, ArgminTieBreaksLow) {
  QTable table(1, 4, 5.0);
  EXPECT_EQ(table.argmin(0), 0);
  table.at(0, 2) = 1.0;
  table.at(0, 3) = 1.0;
  EXPECT_EQ(table.argmin(0), 2);
}

TEST(QLearn, InitDirectGlobalEntryIs456) {
  const Topology t(kDesk);
  const TimingParams timing;
  EXPECT_EQ(host_delivery_ns(timing), 62);
  for (RouterId r = 0; r < t.m(); ++r) {
    TwoLevelQTable table(t);
    q_init(table, t, r, timing);
    for (PortId port = t.first_global_port(); port < t.k(); ++port) {
      const GroupId j = t.global_target(r, port);
      for (int n = 0; n < t.p(); ++n) EXPECT_EQ(table.at(table.row_of(j, n), port - t.p()), 456.0);
    }
  }
}

TEST(QLearn, InitMatchesDijkstraOracle) {
  for (const DragonflyParams& params : {kDesk, DragonflyParams{4, 8, 4}}) {
    const Topology t(params);
    const TimingParams timing;
    const TimeNs tail = timing.link_time(PortKind::kLocal) + timing.link_time(PortKind::kHost);
    std::vector<std::vector<TimeNs>> dist;
    for (GroupId j = 0; j < t.g(); ++j) dist.push_back(dijkstra_to_group(t, timing, j));
    for (RouterId r = 0; r < t.m(); r += (params.a == 4 ? 1 : 5)) {
      TwoLevelQTable table(t);
      q_init(table, t, r, timing);
      for (GroupId j = 0; j < t.g(); ++j) {
        if (j == t.group_of(r)) continue;
        TimeNs best = std::numeric_limits<TimeNs>::max();
        for (PortId port = t.p(); port < t.k(); ++port) {
          const TimeNs want = timing.link_time(t.kind(port)) + dist[j][t.peer(r, port).router] + tail;
          best = std::min(best, want);
          for (int n = 0; n < t.p(); ++n) {
            ASSERT_EQ(table.at(table.row_of(j, n), port - t.p()), static_cast<double>(want));
          }
        }
        const int row = table.row_of(j, 0);
        EXPECT_EQ(table.min(row), static_cast<double>(best));
        EXPECT_EQ(t.p() + table.argmin(row), t.min_port_to_group(r, j));
      }
    }
  }
}

TEST(QLearn, LegacyInitIsZeroLoadPathTime) {
  const Topology t(kDesk);
  const TimingParams timing;
  LegacyQTable table(t);
  q_init(table, t, 0, timing);
  for (RouterId d = 1; d < t.m(); ++d) {
    TimeNs want = 62;
    for (PortId port : t.minimal_path(0, d)) want += timing.link_time(t.kind(port));
    EXPECT_EQ(table.min(d), static_cast<double>(want)) << d;
  }
}

TEST(QLearn, ExplorationNeverExceedsFiveHops) {
  const Topology t(kDesk);
  int max_enumerated = 0;
  std::map<std::pair<RouterId, RouterId>, std::set<int>> allowed;
  for (RouterId s = 0; s < t.m(); ++s) {
    for (RouterId d = 0; d < t.m(); ++d) {
      allowed[{s, d}] = enumerate_qadaptive_hops(t, s, d);
      max_enumerated = std::max(max_enumerated, *allowed[{s, d}].rbegin());
    }
  }
  EXPECT_EQ(max_enumerated, 5);

  // Zero-load replay with every decision random.
  Simulation sim(desk("qadaptive", "ur", 0.0, 5, {{"epsilon", "1"}, {"write_packets", "true"}}));
  for (int round = 0; round < 6; ++round) {
    for (RouterId s = 0; s < t.m(); ++s) {
      for (RouterId d = 0; d < t.m(); ++d) sim.inject(t.node_at(s, round % 2), t.node_at(d, 0));
    }
    sim.drain();
  }
  std::set<int> seen;
  for (const PacketRecord& p : sim.packets()) {
    const RouterId s = t.router_of(p.src);
    const RouterId d = t.router_of(p.dst);
    ASSERT_TRUE((allowed[{s, d}].count(p.hops))) << s << "->" << d << " hops " << p.hops;
    seen.insert(p.hops);
  }
  EXPECT_EQ(*seen.rbegin(), 5);
}

TEST(QLearn, ExplorationUnderLoadRespectsCap) {
  RunConfig cfg = desk("qadaptive", "adv:4", 1.0, 2, {{"epsilon", "1"}});
  cfg.warmup_ns = 20'000;
  cfg.measure_ns = 20'000;
  const RunResult res = run_experiment(cfg);
  ASSERT_EQ(res.status, RunStatus::kOk) << res.message;
  EXPECT_EQ(res.net.hop_cap_violations, 0);
  EXPECT_LE(res.net.max_hops, 5);
}

TEST(QLearn, GreedyOnFreshTablesRoutesMinimally) {
  const Topology t(kDesk);
  Simulation sim(desk("qadaptive", "ur", 0.0, 1, {{"epsilon", "0"}, {"write_packets", "true"}}));
  for (RouterId s = 0; s < t.m(); ++s) {
    for (RouterId d = 0; d < t.m(); ++d) {
      sim.inject(t.node_at(s, 0), t.node_at(d, 1));
      sim.drain();
    }
  }
  for (const PacketRecord& p : sim.packets()) {
    ASSERT_EQ(p.hops, t.minimal_hops(t.router_of(p.src), t.router_of(p.dst)));
  }
}

TEST(QLearn, ZeroLoadTablesAreAFixedPoint) {
  // A packet whose path ends with a local hop in the destination group sees
  // exactly the initialized estimates, so every update has delta = 0.
  const Topology t(kDesk);
  Simulation sim(desk("qadaptive", "ur", 0.0, 1, {{"epsilon", "0"}}));
  auto& policy = dynamic_cast<QAdaptivePolicy&>(sim.policy());
  const std::vector<QTable> before = snapshot(policy, t);
  int injected = 0;
  for (RouterId s = 0; s < t.m(); ++s) {
    for (RouterId d = 0; d < t.m(); ++d) {
      if (t.group_of(s) == t.group_of(d)) continue;
      if (t.gateway_to_group(d, t.group_of(s)).router == d) continue;
      sim.inject(t.node_at(s, 1), t.node_at(d, 0));
      sim.drain();
      ++injected;
    }
  }
  EXPECT_GT(injected, 0);
  EXPECT_GT(policy.updates(), 0u);
  for (RouterId r = 0; r < t.m(); ++r) {
    const QTable& now = policy.table(r);
    for (int row = 0; row < now.rows(); ++row) {
      for (int col = 0; col < now.cols(); ++col) {
        ASSERT_DOUBLE_EQ(now.at(row, col), before[r].at(row, col)) << "router " << r;
      }
    }
  }
}

TEST(QLearn, RoutersOffThePathKeepTheirTables) {
  const Topology t(kDesk);
  Simulation sim(desk("qadaptive", "ur", 0.0, 1, {{"epsilon", "1"}}));
  auto& policy = dynamic_cast<QAdaptivePolicy&>(sim.policy());
  const std::vector<QTable> before = snapshot(policy, t);
  // Intra-router and direct same-group traffic never leaves the group.
  sim.inject(t.node_at(0, 0), t.node_at(0, 1));
  sim.inject(t.node_at(1, 0), t.node_at(2, 1));
  sim.drain();
  for (RouterId r = 0; r < t.m(); ++r) {
    if (r == 1) continue;
    const QTable& now = policy.table(r);
    for (int row = 0; row < now.rows(); ++row) {
      for (int col = 0; col < now.cols(); ++col) ASSERT_EQ(now.at(row, col), before[r].at(row, col));
    }
  }
}

TEST(QLearn, CongestionRaisesEstimates) {
  Simulation sim(desk("qadaptive", "adv:1", 0.8));
  auto& policy = dynamic_cast<QAdaptivePolicy&>(sim.policy());
  const Topology& t = sim.topology();
  const Topology::Gateway gw = t.gateway_to_group(t.router_at(0, 0), 1);
  const TwoLevelQTable& table = policy.table(gw.router);
  const double initial = table.at(table.row_of(1, 0), gw.port - t.p());
  sim.run_until(20'000);
  EXPECT_GT(table.at(table.row_of(1, 0), gw.port - t.p()), initial);
}

TEST(QLearn, LegacyWithZeroThresholdMatchesMin) {
  auto run = [](const char* routing, const std::vector<std::pair<std::string, std::string>>& extra) {
    auto kv = extra;
    kv.push_back({"write_packets", "true"});
    RunConfig cfg = desk(routing, "adv:1", 0.6, 4, kv);
    cfg.warmup_ns = 20'000;
    cfg.measure_ns = 10'000;
    return run_experiment(cfg);
  };
  const RunResult legacy = run("qrouting", {{"maxq", "0"}});
  const RunResult min = run("min", {});
  ASSERT_EQ(legacy.packets.size(), min.packets.size());
  for (std::size_t i = 0; i < min.packets.size(); ++i) {
    ASSERT_EQ(legacy.packets[i].path, min.packets[i].path) << i;
    ASSERT_EQ(legacy.packets[i].deliver_ns, min.packets[i].deliver_ns) << i;
  }
}

TEST(QLearn, LegacyRespectsMaxqCap) {
  for (const char* maxq : {"1", "2", "3"}) {
    RunConfig cfg = desk("qrouting", "adv:4", 1.0, 1, {{"maxq", maxq}});
    cfg.warmup_ns = 30'000;
    cfg.measure_ns = 20'000;
    const RunResult res = run_experiment(cfg);
    ASSERT_EQ(res.status, RunStatus::kOk) << res.message;
    EXPECT_EQ(res.net.hop_cap_violations, 0);
    EXPECT_LE(res.net.max_hops, std::stoi(maxq) + 3);
  }
}

TEST(QLearn, FeedbackCarriesChosenPortEstimate) {
  const Topology t(kDesk);
  QAdaptivePolicy policy(t, QHyperParams{}, TimingParams{}, 1);
  Packet pkt;
  pkt.dst_group = 4;
  pkt.src_local = 1;
  const RouterId r = 10;
  const FeedbackMsg to_host = policy.make_feedback(r, pkt, 0);
  EXPECT_EQ(to_host.q_next, 62.0);
  const int row = policy.table(r).row_of(4, 1);
  for (PortId port = t.p(); port < t.k(); ++port) {
    const FeedbackMsg fwd = policy.make_feedback(r, pkt, port);
    EXPECT_EQ(fwd.row, row);
    EXPECT_EQ(fwd.q_next, policy.table(r).at(row, port - t.p()));
  }

  const PortId port = t.first_global_port();
  FeedbackMsg msg = policy.make_feedback(r, pkt, port);
  msg.port = port;
  msg.reward = 1000;
  msg.q_next = 0;
  const double q = policy.table(r).at(msg.row, port - t.p());
  policy.apply_feedback(r, msg);
  EXPECT_DOUBLE_EQ(policy.table(r).at(msg.row, port - t.p()), hysteretic_update(q, 1000, 0, 0.2, 0.04));
}

TEST(QLearn, CsvDump) {
  QTable table(2, 2, 1.5);
  std::ostringstream out;
  table.write_csv(out, "7,");
  EXPECT_EQ(out.str(), "7,0,0,1.500000\n7,0,1,1.500000\n7,1,0,1.500000\n7,1,1,1.500000\n");
}

TEST(QLearn, HyperParamValidation) {
  QHyperParams hp;
  EXPECT_NO_THROW(hp.validate());
  hp.alpha = 1.5;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = QHyperParams{};
  hp.epsilon = -0.1;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = QHyperParams{};
  hp.q_thld2 = -1;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
}
