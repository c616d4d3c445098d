#pragma once

#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfsim {

using TimeNs = std::int64_t;

enum class EventKind : std::uint8_t {
  kPacketGen,
  kLinkArrival,
  kTryForward,
  kCreditReturn,
  kFeedbackArrival,
  kMetricsTick,
  kLoadChange,
};

const char* to_string(EventKind kind);

// Kind-specific payload is packed into the generic fields:
//   target   router id, or node id when `to_node` is set
//   port     input port (arrival), output port (forward/credit/feedback)
//   index    packet slot, generation epoch, or schedule segment
//   word     feedback row / reward in ns
//   value    feedback q_next
struct Event {
  TimeNs time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kMetricsTick;
  bool to_node = false;
  std::uint8_t vc = 0;
  std::int16_t port = -1;
  std::int32_t target = -1;
  std::int32_t index = -1;
  std::int64_t word = 0;
  double value = 0.0;
};

// Raised by the livelock/deadlock guard and by violated model contracts.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void handle(const Event& e) = 0;
  // Packets that can no longer make progress once the queue is empty.
  virtual std::int64_t stranded_packets() const { return 0; }
};

struct SimulationSummary {
  std::uint64_t events = 0;
  TimeNs clock = 0;
};

class Engine {
 public:
  TimeNs now() const { return now_; }
  std::uint64_t processed() const { return processed_; }
  std::size_t pending() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }

  // Assigns the tie-break sequence number. Scheduling before now() throws.
  void schedule(Event e);

  // Processes every event with time <= t_end; the clock ends at t_end.
  SimulationSummary run_until(TimeNs t_end, EventSink& sink);
  // Processes events until the queue is empty.
  SimulationSummary drain(EventSink& sink);

  // Pops the next event without dispatching (test hook).
  Event pop();

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };

  void check_stranded(const EventSink& sink) const;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  TimeNs now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
};

// Purpose tags for independent random streams.
enum class StreamTag : std::uint32_t {
  kTraffic = 1,
  kExploration = 2,
  kIntermediate = 3,
  kSetup = 4,
  kPhase = 5,
};

// Reproducible stream keyed by (seed, tag, index). Distribution code is local
// so the draws do not depend on the standard library's implementation.
class RngStream {
 public:
  RngStream() : RngStream(0, StreamTag::kSetup, 0) {}
  RngStream(std::uint64_t seed, StreamTag tag, std::uint32_t index);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double prob) { return prob > 0.0 && uniform01() < prob; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dfsim
