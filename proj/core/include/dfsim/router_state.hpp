#pragma once

#include <cstdint>
#include <vector>

#include "dfsim/engine.hpp"
#include "dfsim/topology.hpp"

namespace dfsim {

// Link and buffer constants. Defaults: 128 B packets over 4 GB/s links
// (32 ns serialization), 30 ns local/host and 300 ns global latency,
// 20-packet VC buffers.
struct TimingParams {
  int packet_bytes = 128;
  double link_gbytes_per_s = 4.0;
  TimeNs local_latency_ns = 30;
  TimeNs global_latency_ns = 300;
  TimeNs host_latency_ns = 30;
  TimeNs router_latency_ns = 0;
  int vc_buffer = 20;
  int output_buffer = 20;

  // Throws std::invalid_argument; serialization must be a whole number of ns.
  void validate() const;

  TimeNs serialization_ns() const;
  TimeNs latency(PortKind kind) const;
  // Zero-load cost of one link traversal: serialization plus propagation.
  TimeNs link_time(PortKind kind) const { return serialization_ns() + latency(kind); }
};

// Fixed-capacity FIFOs of packet slots packed into one allocation.
class RingQueues {
 public:
  RingQueues() = default;
  RingQueues(int queues, int capacity);

  int capacity() const { return capacity_; }
  int size(int q) const { return size_[q]; }
  bool empty(int q) const { return size_[q] == 0; }
  bool full(int q) const { return size_[q] == capacity_; }
  std::int32_t front(int q) const { return data_[q * capacity_ + head_[q]]; }
  void push(int q, std::int32_t value);
  std::int32_t pop(int q);

 private:
  int capacity_ = 0;
  std::vector<std::int32_t> data_;
  std::vector<std::int32_t> head_;
  std::vector<std::int32_t> size_;
};

// Buffers, credits and link state of one input-output-queued router.
// Queues are indexed by slot(port, vc).
struct RouterState {
  RouterState() = default;
  RouterState(int ports, int host_ports, int vcs, int input_capacity, int output_capacity);

  int slot(PortId port, int vc) const { return port * vcs + vc; }

  // Packets buffered in this router that target `port` (output queues plus
  // input heads blocked on it) plus credits consumed on the downstream
  // buffers. Host ports report 0.
  int congestion_estimate(PortId port) const {
    return port < host_ports ? 0 : out_occupancy[port] + waiting[port] + used_credits[port];
  }

  int ports = 0;
  int host_ports = 0;
  int vcs = 0;

  RingQueues input;
  RingQueues output;

  std::vector<std::int32_t> credits;           // per slot: free downstream slots
  std::vector<std::int32_t> link_packets;      // per slot: packets on the wire
  std::vector<std::int32_t> credits_returning; // per slot: credits on the reverse path

  std::vector<TimeNs> busy_until;      // per port
  std::vector<std::int32_t> out_occupancy;
  std::vector<std::int32_t> used_credits;
  std::vector<std::int32_t> waiting;
  std::vector<std::int32_t> rr_next;  // per port: next (input port, vc) in arbitration order
  std::vector<std::uint8_t> wake_pending;

  // Input heads blocked on a full output queue, FIFO per output slot,
  // threaded through the input slots.
  std::vector<std::int32_t> wait_head;
  std::vector<std::int32_t> wait_tail;
  std::vector<std::int32_t> wait_next;
};

}  // namespace dfsim
