#pragma once

// Closed-form per-update times, speedup and worker-count optima for
// synchronous SGD under a central parameter server, plus the h-rho
// feasibility frontier of compressed-domain training.
//
// Symbols: M workers, C seconds per single-node minibatch, i iterations per
// global update (C_u = i*C), W weight bytes, chi cluster bytes/s.

#include <cstdint>
#include <optional>

#include "psim/types.hpp"

namespace psim {

// c = C/M: per-minibatch compute after the batch shrinks with the data split.
double local_minibatch_time(const ClusterConfig& cfg);

// T_cmt = i*C/M, compute portion of one global update.
double computation_time(const ClusterConfig& cfg);

// T_tnf = W*M/chi, transfer portion of one global update (push + broadcast
// accounted as one round through the cluster rate).
double transfer_time(const ClusterConfig& cfg);

// Per-phase times of one global update.
//   vanilla:            T_cmt + T_tnf
//   repetitive_codec:   T_cmt + 2*compress + (M+1)*decompress + rho*T_tnf
//                       (workers compress in parallel, the server decompresses
//                       M pushed blobs sequentially, compresses the global
//                       blob once, workers decompress in parallel)
//   one_time_homomorphic: h*T_cmt + rho*T_tnf; the one-time codec cost is
//                       charged in simulate_training, not per update.
PhaseBreakdown update_time(const ClusterConfig& cfg, Strategy strategy,
                           const std::optional<CodecProfile>& profile = std::nullopt);

// C_u / t_update: single-node per-update time over the distributed one.
// The ideal no-communication reference is speedup = M.
double speedup(const ClusterConfig& cfg, Strategy strategy,
               const std::optional<CodecProfile>& profile = std::nullopt);

// Smallest M >= 1 whose transfer time reaches the compute time,
// i.e. smallest M with M^2 >= C_u*chi/W.
uint32_t crossover_workers(const ClusterConfig& cfg);

struct OptimalWorkers {
  uint32_t workers = 1;
  double speedup = 0.0;
};

// Argmax of speedup over M in [1, m_limit]; ties go to the smaller M.
// For vanilla the continuous optimum is sqrt(C_u*chi/W).
OptimalWorkers optimal_workers(const ClusterConfig& cfg, Strategy strategy,
                               const std::optional<CodecProfile>& profile = std::nullopt,
                               uint32_t m_limit = 1024);

// h_max = r - (M^2*W/(C_u*chi))*rho. Setting h = h_max makes the
// one-time-homomorphic update time exactly (C_u/M)*r. h_max < 1 means the
// budget is infeasible at this rho (FrontierPoint::feasible()).
FrontierPoint frontier_h_max(const ClusterConfig& cfg, double rho, double target_factor);

}  // namespace psim
