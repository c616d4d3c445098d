#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dfsim/config.hpp"
#include "dfsim/simulation.hpp"

namespace dfsim {

// Runs every cell as an isolated instance on up to `parallel` threads.
// Results come back in cell order whatever the completion order.
std::vector<RunResult> sweep(const std::vector<RunConfig>& cells, int parallel);

std::string summary_header();
std::string summary_row(const RunResult& res);
std::string timeseries_header();

void write_summary(std::ostream& out, const std::vector<RunResult>& results);
void write_timeseries(std::ostream& out, const std::vector<RunResult>& results);
void write_packets(std::ostream& out, const std::vector<RunResult>& results);
void write_topology(std::ostream& out, const RunResult& res);
void write_qtable(std::ostream& out, const std::vector<RunResult>& results, RouterId router);

// summary.csv and timeseries.csv always; topology.csv, packets.csv and
// qtable_router<id>.csv when any cell asked for them.
void write_outputs(const std::string& dir, const std::vector<RunResult>& results);

}  // namespace dfsim
