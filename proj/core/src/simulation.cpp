#include "dfsim/simulation.hpp"

#include <cmath>

namespace dfsim {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kOk:
      return "ok";
    case RunStatus::kDeadlock:
      return "deadlock";
    case RunStatus::kAssertion:
      return "assertion";
    case RunStatus::kError:
      return "error";
  }
  return "?";
}

Simulation::Simulation(const RunConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      topo_(cfg_.topo),
      policy_(make_policy(topo_, cfg_.routing, cfg_.timing, cfg_.seed)),
      picker_(topo_, cfg_.pattern, cfg_.seed),
      metrics_(topo_.n(), cfg_.timing, cfg_.window_ns, cfg_.warmup_ns, cfg_.warmup_ns + cfg_.measure_ns) {
  network_ = std::make_unique<Network>(topo_, cfg_.timing, cfg_.routing, *policy_, engine_);
  network_->enable_trace(cfg_.write_packets);
  network_->on_delivery([this](const Packet& pkt, TimeNs now) {
    DeliveryRecord rec;
    rec.gen_ns = pkt.gen_time;
    rec.deliver_ns = now;
    rec.hops = pkt.hops;
    rec.src_node = pkt.src_node;
    rec.dst_node = pkt.dst_node;
    metrics_.record(rec);
    if (cfg_.write_packets) {
      PacketRecord out;
      out.id = pkt.id;
      out.src = pkt.src_node;
      out.dst = pkt.dst_node;
      out.gen_ns = pkt.gen_time;
      out.deliver_ns = now;
      out.hops = pkt.hops;
      out.path.assign(pkt.path.begin(), pkt.path.begin() + pkt.path_len);
      packets_.push_back(std::move(out));
    }
  });

  phase_rng_.reserve(static_cast<std::size_t>(topo_.n()));
  for (NodeId n = 0; n < topo_.n(); ++n) {
    phase_rng_.emplace_back(cfg_.seed, StreamTag::kPhase, static_cast<std::uint32_t>(n));
  }
  sources_.resize(static_cast<std::size_t>(topo_.n()));

  const auto& segments = cfg_.schedule.segments();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    Event e;
    e.kind = EventKind::kLoadChange;
    e.time = segments[i].start;
    e.index = static_cast<std::int32_t>(i);
    engine_.schedule(e);
  }
  Event tick;
  tick.kind = EventKind::kMetricsTick;
  tick.time = cfg_.window_ns;
  tick.index = 0;
  engine_.schedule(tick);
  for (std::size_t i = 0; i < cfg_.qtable_snapshot_ns.size(); ++i) {
    Event snap;
    snap.kind = EventKind::kMetricsTick;
    snap.time = cfg_.qtable_snapshot_ns[i];
    snap.index = static_cast<std::int32_t>(i + 1);
    engine_.schedule(snap);
  }
}

Simulation::~Simulation() = default;

void Simulation::start_segment(std::size_t index) {
  const LoadSegment& seg = cfg_.schedule.segments()[index];
  ++epoch_;
  if (!(seg.load > 0.0)) return;
  const double interval = generation_interval(seg.load, cfg_.timing);
  for (NodeId n = 0; n < topo_.n(); ++n) {
    Source& src = sources_[n];
    src.epoch = epoch_;
    src.base = seg.start;
    src.interval = interval;
    src.phase = phase_rng_[n].uniform01() * interval;
    schedule_gen(n, 0);
  }
}

void Simulation::schedule_gen(NodeId n, std::int64_t k) {
  const Source& src = sources_[n];
  Event e;
  e.kind = EventKind::kPacketGen;
  e.time = src.base + static_cast<TimeNs>(std::floor(src.phase + static_cast<double>(k) * src.interval));
  e.target = n;
  e.to_node = true;
  e.index = static_cast<std::int32_t>(src.epoch);
  e.word = k;
  engine_.schedule(e);
}

void Simulation::handle(const Event& e) {
  switch (e.kind) {
    case EventKind::kPacketGen: {
      if (!generating_ || static_cast<std::uint32_t>(e.index) != epoch_) return;
      const NodeId dst = picker_.pick(e.target);
      if (dst >= 0) {
        ++generated_;
        network_->enqueue(e.target, dst, engine_.now());
      }
      schedule_gen(e.target, e.word + 1);
      break;
    }
    case EventKind::kLoadChange:
      start_segment(static_cast<std::size_t>(e.index));
      break;
    case EventKind::kMetricsTick:
      if (e.index == 0) {
        on_tick();
      } else {
        take_snapshot(e.time);
      }
      break;
    default:
      network_->handle(e);
      break;
  }
}

std::int64_t Simulation::progress() const {
  const NetworkStats& s = network_->stats();
  return s.delivered + s.link_departures + s.injected;
}

void Simulation::on_tick() {
  const TimeNs now = engine_.now();
  if (cfg_.audit) {
    const std::int64_t bad = network_->audit_credits();
    credit_violations_ += bad;
    if (bad > 0) throw SimulationError("credit audit failed at t=" + std::to_string(now));
  }
  const std::int64_t p = progress();
  if (network_->in_network() == 0 || p != last_progress_) {
    last_progress_ = p;
    last_progress_time_ = now;
  } else if (now - last_progress_time_ >= cfg_.stall_ns) {
    ++deadlock_firings_;
    throw SimulationError("deadlock: " + std::to_string(network_->in_network()) + " packets made no progress for " +
                          std::to_string(now - last_progress_time_) + " ns");
  }
  if (generating_ || stranded_packets() > 0) {
    Event tick;
    tick.kind = EventKind::kMetricsTick;
    tick.time = now + cfg_.window_ns;
    tick.index = 0;
    engine_.schedule(tick);
  }
}

void Simulation::take_snapshot(TimeNs time) {
  std::vector<RouterId> routers = cfg_.qtable_routers;
  if (routers.empty()) routers.push_back(0);
  for (RouterId r : routers) {
    QSnapshot snap;
    snap.time = time;
    snap.router = r;
    if (auto* qa = dynamic_cast<QAdaptivePolicy*>(policy_.get())) {
      snap.table = qa->table(r);
    } else if (auto* qr = dynamic_cast<QRoutingPolicy*>(policy_.get())) {
      snap.table = qr->table(r);
    } else {
      return;
    }
    snapshots_.push_back(std::move(snap));
  }
}

std::int64_t Simulation::stranded_packets() const { return network_->in_network() + network_->source_backlog(); }

void Simulation::inject(NodeId src, NodeId dst) {
  ++generated_;
  network_->enqueue(src, dst, engine_.now());
}

void Simulation::run_until(TimeNs t) { engine_.run_until(t, *this); }

void Simulation::drain() {
  generating_ = false;
  try {
    engine_.drain(*this);
  } catch (const SimulationError&) {
    ++deadlock_firings_;
    throw;
  }
}

RunResult Simulation::run() {
  RunResult res;
  res.config = cfg_;
  const TimeNs end = cfg_.end_ns();
  try {
    run_until(end);
    if (cfg_.drain) drain();
  } catch (const SimulationError& e) {
    res.status = RunStatus::kDeadlock;
    res.message = e.what();
    if (deadlock_firings_ == 0 && credit_violations_ == 0) ++deadlock_firings_;
    if (credit_violations_ > 0) res.status = RunStatus::kAssertion;
  } catch (const std::exception& e) {
    res.status = RunStatus::kError;
    res.message = e.what();
  }

  const std::int64_t bad = network_->audit_credits();
  credit_violations_ += bad;
  const std::int64_t inflight = network_->in_network() + network_->source_backlog();
  if (res.status == RunStatus::kOk) {
    if (bad > 0) {
      res.status = RunStatus::kAssertion;
      res.message = "credit audit found " + std::to_string(bad) + " violations";
    } else if (generated_ != network_->stats().delivered + inflight) {
      res.status = RunStatus::kAssertion;
      res.message = "packet conservation violated";
    } else if (network_->stats().hop_cap_violations > 0) {
      res.status = RunStatus::kAssertion;
      res.message = "hop cap exceeded by " + std::to_string(network_->stats().hop_cap_violations) + " packets";
    }
  }

  res.measured = metrics_.measurement();
  res.series = metrics_.series(end);
  res.converge_ns = convergence_time(res.series, cfg_.converge_tol, cfg_.converge_hold);
  res.generated = generated_;
  res.inflight = inflight;
  res.net = network_->stats();
  res.deadlock_firings = deadlock_firings_;
  res.credit_violations = credit_violations_;
  res.events = engine_.processed();
  res.packets = std::move(packets_);
  res.snapshots = std::move(snapshots_);
  return res;
}

RunResult run_experiment(const RunConfig& cfg) {
  try {
    Simulation sim(cfg);
    return sim.run();
  } catch (const std::exception& e) {
    RunResult res;
    res.config = cfg;
    res.status = RunStatus::kError;
    res.message = e.what();
    return res;
  }
}

}  // namespace dfsim
