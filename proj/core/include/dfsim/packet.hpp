#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dfsim/engine.hpp"
#include "dfsim/topology.hpp"

namespace dfsim {

enum class PathMode : std::uint8_t { kUndecided, kMinimal, kNonMinimal };

// Per-packet routing state carried in the header.
struct RoutePhase {
  RouterId via_router = -1;  // intermediate router waypoint (VALn-style)
  GroupId via_group = -1;    // intermediate group waypoint (VALg-style)
  PathMode mode = PathMode::kUndecided;
  bool first_intermediate = false;  // at the first router of an intermediate group
  bool left_source_group = false;
  bool entered_intermediate = false;
};

inline constexpr int kMaxTracedHops = 16;

// Single-flit packet: one packet occupies one buffer slot.
struct Packet {
  std::int64_t id = -1;
  NodeId src_node = -1;
  NodeId dst_node = -1;
  RouterId src_router = -1;
  RouterId dst_router = -1;
  GroupId src_group = -1;
  GroupId dst_group = -1;
  std::int16_t src_local = 0;  // node index within its router
  std::uint8_t vc = 0;
  std::uint8_t hops = 0;  // router-to-router hops taken
  TimeNs gen_time = 0;
  TimeNs arrival_time = 0;       // arrival at the current router
  TimeNs prev_arrival_time = 0;  // arrival at the upstream router
  TimeNs ready_time = 0;         // eligible for the output link
  PortId out_port = kNoPort;
  std::uint8_t out_vc = 0;
  std::int32_t in_slot = 0;      // (input port, vc) that fed the output queue
  bool routed = false;
  RoutePhase phase;
  std::uint8_t path_len = 0;
  std::array<RouterId, kMaxTracedHops> path{};
};

// Slot allocator for in-flight packets; slots are reused after delivery.
class PacketPool {
 public:
  std::int32_t allocate() {
    if (free_.empty()) {
      slots_.emplace_back();
      return static_cast<std::int32_t>(slots_.size() - 1);
    }
    const std::int32_t slot = free_.back();
    free_.pop_back();
    slots_[slot] = Packet{};
    return slot;
  }
  void release(std::int32_t slot) { free_.push_back(slot); }

  Packet& operator[](std::int32_t slot) { return slots_[slot]; }
  const Packet& operator[](std::int32_t slot) const { return slots_[slot]; }

  std::int64_t live() const { return static_cast<std::int64_t>(slots_.size() - free_.size()); }

 private:
  std::vector<Packet> slots_;
  std::vector<std::int32_t> free_;
};

}  // namespace dfsim
