#include "dfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfsim {

std::optional<TimeNs> percentile_sorted(const std::vector<TimeNs>& sorted, double q) {
  if (sorted.empty()) return std::nullopt;
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile q must lie in (0,1]");
  // Guard against q*count landing a hair above an integer.
  const double rank = std::ceil(q * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

std::optional<TimeNs> percentile(std::vector<TimeNs> samples, double q) {
  std::sort(samples.begin(), samples.end());
  return percentile_sorted(samples, q);
}

double throughput(std::int64_t delivered, TimeNs window_ns, int nodes, const TimingParams& timing) {
  if (window_ns <= 0) throw std::invalid_argument("throughput window must be > 0");
  if (nodes <= 0) throw std::invalid_argument("throughput needs at least one node");
  const double capacity = static_cast<double>(window_ns) * nodes / static_cast<double>(timing.serialization_ns());
  return static_cast<double>(delivered) / capacity;
}

namespace {

WindowStats stats_from_samples(std::vector<TimeNs>& latencies, std::int64_t hop_sum, TimeNs t0, TimeNs t1,
                               int nodes, const TimingParams& timing) {
  WindowStats w;
  w.t0 = t0;
  w.t1 = t1;
  w.count = static_cast<std::int64_t>(latencies.size());
  w.throughput = throughput(w.count, t1 - t0, nodes, timing);
  if (latencies.empty()) return w;
  std::sort(latencies.begin(), latencies.end());
  long double sum = 0;
  for (TimeNs v : latencies) sum += v;
  w.mean_ns = static_cast<double>(sum / latencies.size());
  w.p50_ns = percentile_sorted(latencies, 0.50);
  w.p95_ns = percentile_sorted(latencies, 0.95);
  w.p99_ns = percentile_sorted(latencies, 0.99);
  w.q1_ns = percentile_sorted(latencies, 0.25);
  w.q3_ns = percentile_sorted(latencies, 0.75);
  const double iqr = static_cast<double>(*w.q3_ns - *w.q1_ns);
  w.whisker_lo_ns = static_cast<double>(*w.q1_ns) - 1.5 * iqr;
  w.whisker_hi_ns = static_cast<double>(*w.q3_ns) + 1.5 * iqr;
  w.mean_hops = static_cast<double>(hop_sum) / static_cast<double>(w.count);
  return w;
}

}  // namespace

WindowStats window_stats(const std::vector<DeliveryRecord>& records, TimeNs t0, TimeNs t1, int nodes,
                         const TimingParams& timing) {
  std::vector<TimeNs> latencies;
  std::int64_t hops = 0;
  for (const DeliveryRecord& r : records) {
    if (r.deliver_ns < t0 || r.deliver_ns >= t1) continue;
    latencies.push_back(r.latency());
    hops += r.hops;
  }
  return stats_from_samples(latencies, hops, t0, t1, nodes, timing);
}

std::optional<TimeNs> convergence_time(const std::vector<WindowStats>& series, double tolerance, int hold) {
  if (hold < 1) throw std::invalid_argument("convergence hold must be >= 1");
  constexpr std::size_t kTail = 5;
  if (series.size() < static_cast<std::size_t>(hold) + kTail) return std::nullopt;
  std::vector<double> tail;
  for (std::size_t i = series.size() - kTail; i < series.size(); ++i) {
    if (!series[i].mean_ns) return std::nullopt;
    tail.push_back(*series[i].mean_ns);
  }
  std::sort(tail.begin(), tail.end());
  const double target = tail[kTail / 2];
  auto close = [&](const WindowStats& w) {
    return w.mean_ns && std::fabs(*w.mean_ns - target) <= tolerance * target;
  };
  int run = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    run = close(series[i]) ? run + 1 : 0;
    if (run == hold) return series[i + 1 - static_cast<std::size_t>(hold)].t0;
  }
  return std::nullopt;
}

std::optional<double> max_window_variation(const std::vector<WindowStats>& series, TimeNs from) {
  std::optional<double> worst;
  const WindowStats* prev = nullptr;
  for (const WindowStats& w : series) {
    if (w.t0 < from || !w.mean_ns) continue;
    if (prev != nullptr) {
      const double change = std::fabs(*w.mean_ns - *prev->mean_ns) / *prev->mean_ns;
      worst = std::max(worst.value_or(0.0), change);
    }
    prev = &w;
  }
  return worst;
}

MetricsCollector::MetricsCollector(int nodes, const TimingParams& timing, TimeNs window_ns, TimeNs measure_from,
                                   TimeNs measure_to)
    : nodes_(nodes), timing_(timing), window_ns_(window_ns), measure_from_(measure_from), measure_to_(measure_to) {
  if (window_ns <= 0) throw std::invalid_argument("window_ns must be > 0");
  if (measure_to <= measure_from) throw std::invalid_argument("measurement interval is empty");
}

void MetricsCollector::record(const DeliveryRecord& rec) {
  if (rec.deliver_ns <= rec.gen_ns) throw std::logic_error("delivery must follow generation");
  ++delivered_;
  const auto w = static_cast<std::size_t>(rec.deliver_ns / window_ns_);
  if (w >= buckets_.size()) buckets_.resize(w + 1);
  Bucket& b = buckets_[w];
  ++b.count;
  b.latency_sum += rec.latency();
  b.hop_sum += rec.hops;
  if (rec.deliver_ns >= measure_from_ && rec.deliver_ns < measure_to_) {
    measured_.push_back(rec.latency());
    measured_hops_ += rec.hops;
  }
}

std::vector<WindowStats> MetricsCollector::series(TimeNs t_end) const {
  std::vector<WindowStats> out;
  const auto full = static_cast<std::size_t>(t_end / window_ns_);
  for (std::size_t i = 0; i < full; ++i) {
    WindowStats w;
    w.t0 = static_cast<TimeNs>(i) * window_ns_;
    w.t1 = w.t0 + window_ns_;
    if (i < buckets_.size()) {
      const Bucket& b = buckets_[i];
      w.count = b.count;
      if (b.count > 0) {
        w.mean_ns = static_cast<double>(b.latency_sum) / static_cast<double>(b.count);
        w.mean_hops = static_cast<double>(b.hop_sum) / static_cast<double>(b.count);
      }
    }
    w.throughput = throughput(w.count, window_ns_, nodes_, timing_);
    out.push_back(w);
  }
  return out;
}

WindowStats MetricsCollector::measurement() const {
  std::vector<TimeNs> copy = measured_;
  return stats_from_samples(copy, measured_hops_, measure_from_, measure_to_, nodes_, timing_);
}

std::int64_t MetricsCollector::window_total() const {
  std::int64_t total = 0;
  for (const Bucket& b : buckets_) total += b.count;
  return total;
}

}  // namespace dfsim
