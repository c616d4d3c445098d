#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dfsim/engine.hpp"
#include "dfsim/router_state.hpp"
#include "dfsim/topology.hpp"

namespace dfsim {

struct DeliveryRecord {
  TimeNs gen_ns = 0;
  TimeNs deliver_ns = 0;
  int hops = 0;
  NodeId src_node = -1;
  NodeId dst_node = -1;

  TimeNs latency() const { return deliver_ns - gen_ns; }
};

// Statistics over deliveries whose delivery time falls in [t0, t1).
// Quantiles are absent when the window saw no deliveries.
struct WindowStats {
  TimeNs t0 = 0;
  TimeNs t1 = 0;
  std::int64_t count = 0;
  std::optional<double> mean_ns;
  std::optional<TimeNs> p50_ns;
  std::optional<TimeNs> p95_ns;
  std::optional<TimeNs> p99_ns;
  std::optional<TimeNs> q1_ns;
  std::optional<TimeNs> q3_ns;
  std::optional<double> whisker_lo_ns;
  std::optional<double> whisker_hi_ns;
  double mean_hops = 0.0;
  double throughput = 0.0;
};

// Nearest-rank percentile: element ceil(q*count) (1-based) of the sorted
// samples. `sorted` must be ascending.
std::optional<TimeNs> percentile_sorted(const std::vector<TimeNs>& sorted, double q);
std::optional<TimeNs> percentile(std::vector<TimeNs> samples, double q);

// Delivered packets over a window, normalised by the aggregate injection
// bandwidth of `nodes` nodes.
double throughput(std::int64_t delivered, TimeNs window_ns, int nodes, const TimingParams& timing);

WindowStats window_stats(const std::vector<DeliveryRecord>& records, TimeNs t0, TimeNs t1, int nodes,
                         const TimingParams& timing);

// Earliest window start from which `hold` consecutive windows have a mean
// latency within +-tolerance of the median of the last five windows.
std::optional<TimeNs> convergence_time(const std::vector<WindowStats>& series, double tolerance = 0.1,
                                       int hold = 5);

// Largest relative change of mean latency between consecutive windows
// starting at `from`; absent when fewer than two such windows have data.
std::optional<double> max_window_variation(const std::vector<WindowStats>& series, TimeNs from);

// Streams deliveries into fixed-width windows and keeps full latency samples
// for the measurement interval only.
class MetricsCollector {
 public:
  MetricsCollector(int nodes, const TimingParams& timing, TimeNs window_ns, TimeNs measure_from, TimeNs measure_to);

  void record(const DeliveryRecord& rec);

  // Windowed series up to `t_end`; partial trailing windows are dropped.
  std::vector<WindowStats> series(TimeNs t_end) const;
  // Full statistics over the measurement interval.
  WindowStats measurement() const;

  std::int64_t delivered() const { return delivered_; }
  std::int64_t window_total() const;
  TimeNs window_ns() const { return window_ns_; }

 private:
  struct Bucket {
    std::int64_t count = 0;
    std::int64_t latency_sum = 0;
    std::int64_t hop_sum = 0;
  };

  int nodes_;
  TimingParams timing_;
  TimeNs window_ns_;
  TimeNs measure_from_;
  TimeNs measure_to_;
  std::vector<Bucket> buckets_;
  std::vector<TimeNs> measured_;
  std::int64_t measured_hops_ = 0;
  std::int64_t delivered_ = 0;
};

}  // namespace dfsim
