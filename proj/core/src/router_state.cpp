#include "dfsim/router_state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dfsim {

void TimingParams::validate() const {
  if (packet_bytes <= 0) throw std::invalid_argument("packet_bytes must be positive");
  if (!(link_gbytes_per_s > 0.0)) throw std::invalid_argument("link_bandwidth must be positive");
  const double ser = packet_bytes / link_gbytes_per_s;
  if (std::abs(ser - std::round(ser)) > 1e-9 || std::round(ser) < 1) {
    throw std::invalid_argument("packet serialization time must be a whole number of ns (got " +
                                std::to_string(ser) + ")");
  }
  if (local_latency_ns < 0 || global_latency_ns < 0 || host_latency_ns < 0 || router_latency_ns < 0) {
    throw std::invalid_argument("latencies must be non-negative");
  }
  if (vc_buffer < 1) throw std::invalid_argument("vc_buffer must be >= 1");
  if (output_buffer < 1) throw std::invalid_argument("output_buffer must be >= 1");
}

TimeNs TimingParams::serialization_ns() const {
  return static_cast<TimeNs>(std::llround(packet_bytes / link_gbytes_per_s));
}

TimeNs TimingParams::latency(PortKind kind) const {
  switch (kind) {
    case PortKind::kHost:
      return host_latency_ns;
    case PortKind::kLocal:
      return local_latency_ns;
    case PortKind::kGlobal:
      return global_latency_ns;
  }
  return 0;
}

RingQueues::RingQueues(int queues, int capacity)
    : capacity_(capacity),
      data_(static_cast<std::size_t>(queues) * capacity),
      head_(queues, 0),
      size_(queues, 0) {}

void RingQueues::push(int q, std::int32_t value) {
  if (size_[q] == capacity_) throw std::logic_error("ring queue overflow");
  int tail = head_[q] + size_[q];
  if (tail >= capacity_) tail -= capacity_;
  data_[q * capacity_ + tail] = value;
  ++size_[q];
}

std::int32_t RingQueues::pop(int q) {
  const std::int32_t value = data_[q * capacity_ + head_[q]];
  if (++head_[q] == capacity_) head_[q] = 0;
  --size_[q];
  return value;
}

RouterState::RouterState(int ports_, int host_ports_, int vcs_, int input_capacity, int output_capacity)
    : ports(ports_),
      host_ports(host_ports_),
      vcs(vcs_),
      input(ports_ * vcs_, input_capacity),
      output(ports_ * vcs_, output_capacity),
      credits(ports_ * vcs_, input_capacity),
      link_packets(ports_ * vcs_, 0),
      credits_returning(ports_ * vcs_, 0),
      busy_until(ports_, 0),
      out_occupancy(ports_, 0),
      used_credits(ports_, 0),
      waiting(ports_, 0),
      rr_next(ports_, 0),
      wake_pending(ports_, 0),
      wait_head(ports_ * vcs_, -1),
      wait_tail(ports_ * vcs_, -1),
      wait_next(ports_ * vcs_, -1) {}

}  // namespace dfsim
