#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psim/codec.hpp"
#include "psim/types.hpp"

namespace psim {

// Deterministic per-(seed, worker, round) weight blob. Generated from a
// splitmix64 stream so server and workers can regenerate identical bytes on
// any platform without shipping the floats out of band.
ParamBlob make_worker_blob(uint64_t seed, uint32_t worker_id, uint32_t round, size_t count);

struct ServerOptions {
  std::string bind_addr = "127.0.0.1";
  uint16_t port = 0;  // 0 picks an ephemeral port, readable via HarnessServer::port()
  uint32_t workers = 1;
  uint32_t rounds = 1;
  Codec codec = Codec::identity();
  uint64_t weight_bytes = 1u << 20;
  double chi_bytes_per_s = 0.0;   // 0 = unlimited
  bool per_link_throttle = false;  // default: one shared ingress rate for all workers
  double timeout_s = 30.0;         // per accept/round phase
  uint64_t seed = 1;

  void validate() const;
};

struct WorkerOptions {
  std::string connect_addr = "127.0.0.1";
  uint16_t port = 0;
  uint32_t worker_id = 0;
  uint32_t rounds = 1;
  Codec codec = Codec::identity();
  uint64_t weight_bytes = 1u << 20;
  double compute_s = 0.0;  // injected local computation per round
  uint64_t seed = 1;
  double timeout_s = 30.0;
  int connect_retries = 3;

  void validate() const;
};

struct RoundStats {
  uint32_t round = 0;
  double push_s = 0.0;       // round open until the last PUSH is fully received
  double aggregate_s = 0.0;  // building the global blob
  double broadcast_s = 0.0;  // first GLOBAL byte until the last worker's send completes
  double end_to_end_s = 0.0;
  double aggregate_abs_err = 0.0;    // global blob vs. float-domain mean of the pushes
  double aggregate_err_bound = 0.0;  // documented codec bound (0 for lossless paths)
};

struct HarnessReport {
  uint32_t workers = 0;
  uint32_t rounds_completed = 0;
  std::string codec;
  uint64_t weight_bytes = 0;
  uint64_t wire_bytes_per_push = 0;  // one PUSH frame, header included
  double chi_bytes_per_s = 0.0;
  std::vector<RoundStats> rounds;
  double measured_transfer_s = 0.0;  // mean per-round push_s + broadcast_s
  double modeled_t_tnf_s = 0.0;      // wire_bytes_per_push * M / chi; 0 when unthrottled
  double relative_error = 0.0;       // |measured - modeled| / modeled; 0 when unthrottled
  double max_aggregate_err = 0.0;
  double aggregate_err_bound = 0.0;
};

struct WorkerRoundStats {
  uint32_t round = 0;
  double compute_s = 0.0;
  double encode_s = 0.0;
  double push_s = 0.0;
  double wait_s = 0.0;  // blocked on GLOBAL
  double decode_s = 0.0;
};

struct WorkerReport {
  uint32_t worker_id = 0;
  std::vector<WorkerRoundStats> rounds;
};

// Parameter server over TCP. start() binds and listens (resolving port 0);
// run() accepts the configured workers, drives all rounds and tears the
// connections down. Every round is a barrier: all M PUSH frames arrive, one
// aggregation happens under the lock, then every worker receives GLOBAL, or
// the round aborts (timeout or disconnect) with a diagnostic naming the
// worker. Aborts surface as NetError.
class HarnessServer {
 public:
  explicit HarnessServer(ServerOptions options);
  ~HarnessServer();
  HarnessServer(const HarnessServer&) = delete;
  HarnessServer& operator=(const HarnessServer&) = delete;

  void start();
  uint16_t port() const;
  HarnessReport run();

 private:
  ServerOptions options_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
};

HarnessReport run_server(const ServerOptions& options);
WorkerReport run_worker(const WorkerOptions& options);

}  // namespace psim
