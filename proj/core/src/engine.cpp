#include "dfsim/engine.hpp"

namespace dfsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kPacketGen:
      return "PacketGen";
    case EventKind::kLinkArrival:
      return "LinkArrival";
    case EventKind::kTryForward:
      return "TryForward";
    case EventKind::kCreditReturn:
      return "CreditReturn";
    case EventKind::kFeedbackArrival:
      return "FeedbackArrival";
    case EventKind::kMetricsTick:
      return "MetricsTick";
    case EventKind::kLoadChange:
      return "LoadChange";
  }
  return "?";
}

void Engine::schedule(Event e) {
  if (e.time < now_) {
    throw SimulationError(std::string("event ") + to_string(e.kind) + " scheduled at " + std::to_string(e.time) +
                          " ns, before the clock (" + std::to_string(now_) + " ns)");
  }
  e.seq = next_seq_++;
  queue_.push(e);
}

Event Engine::pop() {
  Event e = queue_.top();
  queue_.pop();
  now_ = e.time;
  ++processed_;
  return e;
}

SimulationSummary Engine::run_until(TimeNs t_end, EventSink& sink) {
  const std::uint64_t start = processed_;
  while (!queue_.empty() && queue_.top().time <= t_end) {
    sink.handle(pop());
  }
  if (queue_.empty()) check_stranded(sink);
  if (now_ < t_end) now_ = t_end;
  return {processed_ - start, now_};
}

SimulationSummary Engine::drain(EventSink& sink) {
  const std::uint64_t start = processed_;
  while (!queue_.empty()) sink.handle(pop());
  check_stranded(sink);
  return {processed_ - start, now_};
}

void Engine::check_stranded(const EventSink& sink) const {
  const std::int64_t stuck = sink.stranded_packets();
  if (stuck > 0) {
    throw SimulationError("deadlock: event queue drained at " + std::to_string(now_) + " ns with " +
                          std::to_string(stuck) + " packets still in flight");
  }
}

RngStream::RngStream(std::uint64_t seed, StreamTag tag, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), index};
  engine_.seed(seq);
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection; exact and portable.
  std::uint64_t x = engine_();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = engine_();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace dfsim
