#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "psim/bench.hpp"
#include "psim/config.hpp"
#include "psim/net_harness.hpp"

namespace psim {

// Subcommand bodies, separated from argument parsing so tests can drive them
// directly. Each prints a human-readable summary to `out` and, when the
// config names an output path, writes the file in the configured format with
// the resolved config embedded.

void cmd_model(const RunConfig& cfg, std::ostream& out);

// kind: "workers" (curve over M), "hgrid" (h x rho grid at fixed M) or
// "compare" (ideal/vanilla/per-rho homomorphic speedup curves).
void cmd_sweep(const RunConfig& cfg, const std::string& kind, std::ostream& out);

void cmd_frontier(const RunConfig& cfg, std::ostream& out);

struct BenchArgs {
  std::vector<std::string> codecs = {"identity", "deflate", "quant8", "quant16"};
  BenchSpec spec;
  double op_overhead = 1.0;  // h for the derived profiles
  std::string output_path;   // optional JSON report
};
void cmd_bench(const BenchArgs& args, std::ostream& out);

struct ServeArgs {
  ServerOptions server;
  std::string output_path;  // optional JSON report
};
void cmd_serve(const ServeArgs& args, std::ostream& out);

struct WorkerArgs {
  WorkerOptions worker;
  std::string output_path;  // optional JSON report
};
void cmd_worker(const WorkerArgs& args, std::ostream& out);

// Process exit code for a failure: 2 config, 3 I/O or data decode, 4 network
// harness, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace psim
