#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dfsim/config.hpp"
#include "dfsim/engine.hpp"
#include "dfsim/metrics.hpp"
#include "dfsim/network.hpp"
#include "dfsim/qlearn.hpp"
#include "dfsim/traffic.hpp"

namespace dfsim {

struct PacketRecord {
  std::int64_t id = 0;
  NodeId src = -1;
  NodeId dst = -1;
  TimeNs gen_ns = 0;
  TimeNs deliver_ns = 0;
  int hops = 0;
  std::vector<RouterId> path;
};

struct QSnapshot {
  TimeNs time = 0;
  RouterId router = -1;
  QTable table;
};

enum class RunStatus : std::uint8_t { kOk, kDeadlock, kAssertion, kError };
const char* to_string(RunStatus status);

struct RunResult {
  RunConfig config;
  RunStatus status = RunStatus::kOk;
  std::string message;

  WindowStats measured;
  std::vector<WindowStats> series;
  std::optional<TimeNs> converge_ns;
  std::int64_t generated = 0;
  std::int64_t inflight = 0;  // in routers/links plus queued at sources
  NetworkStats net;
  std::int64_t deadlock_firings = 0;
  std::int64_t credit_violations = 0;
  std::uint64_t events = 0;

  std::vector<PacketRecord> packets;
  std::vector<QSnapshot> snapshots;
};

// One simulation instance: engine, network, traffic sources and metrics.
class Simulation final : public EventSink {
 public:
  explicit Simulation(const RunConfig& cfg);
  ~Simulation() override;

  // Warmup plus measurement (and drain when configured). Failures are
  // reported through the result status rather than thrown.
  RunResult run();

  // Test hooks.
  void inject(NodeId src, NodeId dst);
  void run_until(TimeNs t);
  void drain();

  void handle(const Event& e) override;
  std::int64_t stranded_packets() const override;

  const RunConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  Engine& engine() { return engine_; }
  Network& network() { return *network_; }
  RoutingPolicy& policy() { return *policy_; }
  const MetricsCollector& metrics() const { return metrics_; }
  std::int64_t generated() const { return generated_; }
  std::int64_t deadlock_firings() const { return deadlock_firings_; }
  std::int64_t credit_violations() const { return credit_violations_; }
  const std::vector<PacketRecord>& packets() const { return packets_; }

 private:
  struct Source {
    std::uint32_t epoch = 0;
    TimeNs base = 0;
    double phase = 0.0;
    double interval = 0.0;
  };

  void start_segment(std::size_t index);
  void schedule_gen(NodeId n, std::int64_t k);
  void on_tick();
  void take_snapshot(TimeNs time);
  std::int64_t progress() const;

  RunConfig cfg_;
  Topology topo_;
  Engine engine_;
  std::unique_ptr<RoutingPolicy> policy_;
  std::unique_ptr<Network> network_;
  DestinationPicker picker_;
  MetricsCollector metrics_;
  std::vector<RngStream> phase_rng_;
  std::vector<Source> sources_;
  std::uint32_t epoch_ = 0;
  bool generating_ = true;

  std::int64_t generated_ = 0;
  std::int64_t deadlock_firings_ = 0;
  std::int64_t credit_violations_ = 0;
  std::int64_t last_progress_ = -1;
  TimeNs last_progress_time_ = 0;

  std::vector<PacketRecord> packets_;
  std::vector<QSnapshot> snapshots_;
};

RunResult run_experiment(const RunConfig& cfg);

}  // namespace dfsim
