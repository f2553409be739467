#pragma once

// Core domain records shared by the cost model, simulator, codec bench and CLI.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace psim {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class NetError : public std::runtime_error {
 public:
  explicit NetError(const std::string& msg) : std::runtime_error(msg) {}
};

class CodecError : public std::runtime_error {
 public:
  CodecError(const std::string& msg, size_t byte_offset)
      : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  size_t byte_offset() const { return byte_offset_; }

 private:
  size_t byte_offset_;
};

// Cluster description for synchronous-SGD training with a central parameter
// server: M workers, per-minibatch compute time C, i minibatch iterations per
// global update, W bytes of weights, cluster transmission rate chi.
struct ClusterConfig {
  uint32_t workers = 16;                   // M
  double minibatch_time_s = 0.5;           // C, single-node seconds per minibatch
  uint32_t iterations = 200;               // i, minibatches per global update
  uint64_t weight_bytes = 244318208;       // W
  double bandwidth_bytes_per_s = 125e6;    // chi
  uint64_t minibatch = 256;                // B, single-node minibatch samples
  uint64_t dataset = 1281167;              // D, samples (epoch accounting only)

  // C_u: single-node compute per global update, i * C.
  double compute_per_update_s() const {
    return static_cast<double>(iterations) * minibatch_time_s;
  }

  // Copy with a different worker count. The minibatch is lifted to keep the
  // per-worker share b = B/M at least one sample; no timing formula reads B.
  ClusterConfig with_workers(uint32_t m) const;

  void validate() const;
};

// Analytic codec parameters: compression ratio rho (compressed/original),
// compressed-domain operation overhead h, and per-blob codec wall times.
struct CodecProfile {
  double rho = 1.0;
  double op_overhead = 1.0;  // h
  double compress_s = 0.0;
  double decompress_s = 0.0;

  void validate() const;
};

enum class Strategy {
  vanilla,               // plain synchronous SGD
  repetitive_codec,      // compress/decompress around every update
  one_time_homomorphic,  // compress once, train in the compressed domain
};

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

// Per-phase wall times of one global parameter update. The whole round's
// transfer volume is attributed to the push path (the server-ingress
// bottleneck the model's chi describes); broadcast is native-speed.
struct PhaseBreakdown {
  double local_compute_s = 0.0;
  double worker_compress_s = 0.0;
  double push_transfer_s = 0.0;
  double server_decompress_s = 0.0;
  double aggregate_s = 0.0;
  double server_compress_s = 0.0;
  double broadcast_transfer_s = 0.0;
  double worker_decompress_s = 0.0;

  double t_cmt = 0.0;
  double t_tnf = 0.0;
  double t_update = 0.0;

  // Canonical field-order sum; every producer must derive t_update from this
  // so the analytic model and the event simulator agree bit for bit.
  double phase_sum() const {
    return local_compute_s + worker_compress_s + push_transfer_s +
           server_decompress_s + aggregate_s + server_compress_s +
           broadcast_transfer_s + worker_decompress_s;
  }

  // Seals t_cmt/t_tnf/t_update from the phase fields.
  void finalize() {
    t_cmt = local_compute_s;
    t_update = phase_sum();
    t_tnf = t_update - t_cmt;
  }
};

// One point of the h-rho feasibility frontier: the largest operation overhead
// that still meets the per-update budget (C_u/M) * target_factor.
struct FrontierPoint {
  double rho = 0.0;
  double h_max = 0.0;
  double target_factor = 1.0;  // r

  bool feasible() const { return h_max >= 1.0; }
};

struct SpeedupRow {
  uint32_t workers = 0;
  double t_cmt = 0.0;
  double t_tnf = 0.0;
  double t_update = 0.0;
  double speedup = 0.0;
};

struct SpeedupCurve {
  std::vector<SpeedupRow> rows;
};

}  // namespace psim
