#include "psim/cost_model.hpp"

#include <cmath>

namespace psim {

namespace {

const CodecProfile& require_profile(Strategy strategy,
                                    const std::optional<CodecProfile>& profile) {
  if (!profile)
    throw ConfigError(std::string("strategy '") + to_string(strategy) +
                      "' requires a codec profile");
  profile->validate();
  return *profile;
}

}  // namespace

double local_minibatch_time(const ClusterConfig& cfg) {
  cfg.validate();
  return cfg.minibatch_time_s / static_cast<double>(cfg.workers);
}

double computation_time(const ClusterConfig& cfg) {
  cfg.validate();
  return cfg.compute_per_update_s() / static_cast<double>(cfg.workers);
}

double transfer_time(const ClusterConfig& cfg) {
  cfg.validate();
  return static_cast<double>(cfg.weight_bytes) * static_cast<double>(cfg.workers) /
         cfg.bandwidth_bytes_per_s;
}

PhaseBreakdown update_time(const ClusterConfig& cfg, Strategy strategy,
                           const std::optional<CodecProfile>& profile) {
  cfg.validate();
  PhaseBreakdown p;
  switch (strategy) {
    case Strategy::vanilla:
      p.local_compute_s = computation_time(cfg);
      p.push_transfer_s = transfer_time(cfg);
      break;
    case Strategy::repetitive_codec: {
      const CodecProfile& prof = require_profile(strategy, profile);
      p.local_compute_s = computation_time(cfg);
      p.worker_compress_s = prof.compress_s;
      p.push_transfer_s = prof.rho * transfer_time(cfg);
      p.server_decompress_s = static_cast<double>(cfg.workers) * prof.decompress_s;
      p.server_compress_s = prof.compress_s;
      p.worker_decompress_s = prof.decompress_s;
      break;
    }
    case Strategy::one_time_homomorphic: {
      const CodecProfile& prof = require_profile(strategy, profile);
      p.local_compute_s = prof.op_overhead * computation_time(cfg);
      p.push_transfer_s = prof.rho * transfer_time(cfg);
      break;
    }
  }
  p.finalize();
  return p;
}

double speedup(const ClusterConfig& cfg, Strategy strategy,
               const std::optional<CodecProfile>& profile) {
  return cfg.compute_per_update_s() / update_time(cfg, strategy, profile).t_update;
}

uint32_t crossover_workers(const ClusterConfig& cfg) {
  cfg.validate();
  double cu = cfg.compute_per_update_s();
  double w = static_cast<double>(cfg.weight_bytes);
  // Start a little below the continuous root of W*M/chi = C_u/M and scan up.
  double root = std::sqrt(cu * cfg.bandwidth_bytes_per_s / w);
  uint64_t m = root > 2.0 ? static_cast<uint64_t>(root) - 1 : 1;
  while (w * static_cast<double>(m) / cfg.bandwidth_bytes_per_s <
         cu / static_cast<double>(m))
    ++m;
  return static_cast<uint32_t>(m);
}

OptimalWorkers optimal_workers(const ClusterConfig& cfg, Strategy strategy,
                               const std::optional<CodecProfile>& profile,
                               uint32_t m_limit) {
  cfg.validate();
  if (m_limit < 1) throw ConfigError("m_limit must be >= 1");
  OptimalWorkers best;
  for (uint32_t m = 1; m <= m_limit; ++m) {
    double s = speedup(cfg.with_workers(m), strategy, profile);
    if (m == 1 || s > best.speedup) best = {m, s};
  }
  return best;
}

FrontierPoint frontier_h_max(const ClusterConfig& cfg, double rho, double target_factor) {
  cfg.validate();
  if (!(rho > 0.0) || rho > 1.0 || !std::isfinite(rho))
    throw ConfigError("frontier rho must lie in (0, 1]");
  if (!(target_factor >= 1.0) || !std::isfinite(target_factor))
    throw ConfigError("frontier target_factor must be >= 1");
  double m = static_cast<double>(cfg.workers);
  double h_max = target_factor -
                 m * m * static_cast<double>(cfg.weight_bytes) /
                     (cfg.compute_per_update_s() * cfg.bandwidth_bytes_per_s) * rho;
  return FrontierPoint{rho, h_max, target_factor};
}

}  // namespace psim
