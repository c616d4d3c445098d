#include "dfsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

namespace dfsim {

std::vector<RunResult> sweep(const std::vector<RunConfig>& cells, int parallel) {
  std::vector<RunResult> results(cells.size());
  const int workers = std::max(1, std::min<int>(parallel, static_cast<int>(cells.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_experiment(cells[i]);
  };
  if (workers == 1) {
    work();
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  return results;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <typename T>
std::string opt(const std::optional<T>& v, int digits = 0) {
  if (!v) return "NA";
  return fixed(static_cast<double>(*v), digits);
}

std::string provenance(const RunResult& res) { return res.config.hash_hex() + "," + std::to_string(res.config.seed); }

}  // namespace

std::string summary_header() {
  return "pattern,load,routing,seed,mean_ns,p50_ns,p95_ns,p99_ns,q1_ns,q3_ns,mean_hops,throughput,converge_ns,"
         "inflight_count,config_hash,status";
}

std::string summary_row(const RunResult& res) {
  const RunConfig& c = res.config;
  const WindowStats& m = res.measured;
  std::string row;
  row += c.pattern.to_string() + ",";
  row += format_double(c.load()) + ",";
  row += to_string(c.routing.tag) + ",";
  row += std::to_string(c.seed) + ",";
  row += opt(m.mean_ns, 3) + ",";
  row += opt(m.p50_ns) + ",";
  row += opt(m.p95_ns) + ",";
  row += opt(m.p99_ns) + ",";
  row += opt(m.q1_ns) + ",";
  row += opt(m.q3_ns) + ",";
  row += (m.count > 0 ? fixed(m.mean_hops, 4) : std::string("NA")) + ",";
  row += fixed(m.throughput, 6) + ",";
  row += opt(res.converge_ns) + ",";
  row += std::to_string(res.inflight) + ",";
  row += c.hash_hex() + ",";
  row += to_string(res.status);
  return row;
}

std::string timeseries_header() { return "t0_ns,mean_ns,throughput,mean_hops,config_hash,seed"; }

void write_summary(std::ostream& out, const std::vector<RunResult>& results) {
  out << summary_header() << '\n';
  for (const RunResult& r : results) out << summary_row(r) << '\n';
}

void write_timeseries(std::ostream& out, const std::vector<RunResult>& results) {
  out << timeseries_header() << '\n';
  for (const RunResult& r : results) {
    const std::string tail = provenance(r);
    for (const WindowStats& w : r.series) {
      out << w.t0 << ',' << opt(w.mean_ns, 3) << ',' << fixed(w.throughput, 6) << ','
          << (w.count > 0 ? fixed(w.mean_hops, 4) : std::string("NA")) << ',' << tail << '\n';
    }
  }
}

void write_packets(std::ostream& out, const std::vector<RunResult>& results) {
  out << "packet_id,src,dst,gen_ns,deliver_ns,hops,path,config_hash,seed\n";
  for (const RunResult& r : results) {
    const std::string tail = provenance(r);
    for (const PacketRecord& p : r.packets) {
      out << p.id << ',' << p.src << ',' << p.dst << ',' << p.gen_ns << ',' << p.deliver_ns << ',' << p.hops << ',';
      for (std::size_t i = 0; i < p.path.size(); ++i) out << (i ? "-" : "") << p.path[i];
      out << ',' << tail << '\n';
    }
  }
}

void write_topology(std::ostream& out, const RunResult& res) {
  Topology(res.config.topo).write_csv(out, ",config_hash,seed", "," + provenance(res));
}

void write_qtable(std::ostream& out, const std::vector<RunResult>& results, RouterId router) {
  out << "time_ns,row,port,value,config_hash,seed\n";
  for (const RunResult& r : results) {
    const std::string tail = provenance(r);
    for (const QSnapshot& s : r.snapshots) {
      if (s.router != router) continue;
      // Columns are network ports; report them as router port ids.
      const int p = r.config.topo.p;
      char buf[96];
      for (int row = 0; row < s.table.rows(); ++row) {
        for (int col = 0; col < s.table.cols(); ++col) {
          std::snprintf(buf, sizeof buf, "%lld,%d,%d,%.6f,", static_cast<long long>(s.time), row, col + p,
                        s.table.at(row, col));
          out << buf << tail << '\n';
        }
      }
    }
  }
}

void write_outputs(const std::string& dir, const std::vector<RunResult>& results) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("summary.csv");
    write_summary(f, results);
  }
  {
    auto f = open("timeseries.csv");
    write_timeseries(f, results);
  }
  const auto topo = std::find_if(results.begin(), results.end(), [](const RunResult& r) { return r.config.write_topology; });
  if (topo != results.end()) {
    auto f = open("topology.csv");
    write_topology(f, *topo);
  }
  if (std::any_of(results.begin(), results.end(), [](const RunResult& r) { return r.config.write_packets; })) {
    auto f = open("packets.csv");
    write_packets(f, results);
  }
  std::set<RouterId> routers;
  for (const RunResult& r : results) {
    for (const QSnapshot& s : r.snapshots) routers.insert(s.router);
  }
  for (RouterId router : routers) {
    auto f = open("qtable_router" + std::to_string(router) + ".csv");
    write_qtable(f, results, router);
  }
}

}  // namespace dfsim
