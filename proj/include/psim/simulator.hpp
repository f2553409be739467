#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psim/types.hpp"

namespace psim {

// One homogeneous block of simulated events. count is the number of events in
// the block; total_s is the block's wall-clock contribution, so parallel
// events (all workers compressing at once) share a single event's duration
// while sequential ones (the server decoding M pushes) accumulate.
struct SimEvent {
  std::string label;
  uint64_t count = 0;
  double total_s = 0.0;
};

// Optional multiplicative noise on every event block, for cross-checking the
// live harness against the analytic model. Zero keeps the simulation exact.
struct SimOptions {
  double jitter_frac = 0.0;  // each block scaled by 1 + jitter_frac*u, u in [-1,1]
  uint64_t jitter_seed = 0;
};

struct TrainingRun {
  double total_s = 0.0;
  std::vector<PhaseBreakdown> updates;
};

struct HRhoCell {
  double h = 1.0;
  double rho = 1.0;
  PhaseBreakdown breakdown;
};

// Row-major grid: h varies along the outer index, rho along the inner one.
struct HRhoGrid {
  std::vector<double> h_list;
  std::vector<double> rho_list;
  std::vector<HRhoCell> cells;

  const HRhoCell& at(size_t h_idx, size_t rho_idx) const {
    return cells[h_idx * rho_list.size() + rho_idx];
  }
};

// Event-granular walk of one global update. With zero jitter the per-phase
// totals (and therefore t_update) match update_time bit for bit; the event
// trace, if requested, decomposes each phase into its block.
PhaseBreakdown simulate_update(const ClusterConfig& cfg, Strategy strategy,
                               const std::optional<CodecProfile>& profile = std::nullopt,
                               const SimOptions& options = {},
                               std::vector<SimEvent>* trace = nullptr);

// Multi-update run. The one-time strategy pays compress once before the first
// update and decompress once after the last; the repetitive strategy carries
// its codec cost inside every update.
TrainingRun simulate_training(const ClusterConfig& cfg, Strategy strategy,
                              const std::optional<CodecProfile>& profile, uint64_t updates);

// One row per worker count in m_range (non-empty, strictly ascending).
SpeedupCurve sweep_workers(const ClusterConfig& cfg, Strategy strategy,
                           const std::optional<CodecProfile>& profile,
                           const std::vector<uint32_t>& m_range);

// Per-update times for the one-time strategy over an (h, rho) grid.
HRhoGrid sweep_h_rho(const ClusterConfig& cfg, const std::vector<double>& h_list,
                     const std::vector<double>& rho_list);

}  // namespace psim
