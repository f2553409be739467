#include "psim/types.hpp"

#include <algorithm>
#include <cmath>

namespace psim {

ClusterConfig ClusterConfig::with_workers(uint32_t m) const {
  ClusterConfig out = *this;
  out.workers = m;
  out.minibatch = std::max<uint64_t>(minibatch, m);
  return out;
}

void ClusterConfig::validate() const {
  if (workers < 1) throw ConfigError("cluster.workers must be >= 1");
  if (!(minibatch_time_s > 0.0) || !std::isfinite(minibatch_time_s))
    throw ConfigError("cluster.minibatch_time_s must be positive and finite");
  if (iterations < 1) throw ConfigError("cluster.iterations must be >= 1");
  if (weight_bytes < 1) throw ConfigError("cluster.weight_bytes must be >= 1");
  if (!(bandwidth_bytes_per_s > 0.0) || !std::isfinite(bandwidth_bytes_per_s))
    throw ConfigError("cluster.bandwidth_bytes_per_s must be positive and finite");
  if (minibatch < 1) throw ConfigError("cluster.minibatch must be >= 1");
  if (minibatch < workers)
    throw ConfigError("cluster.minibatch must be >= cluster.workers (b = B/M >= 1)");
  if (dataset < 1) throw ConfigError("cluster.dataset must be >= 1");
  double cu = compute_per_update_s();
  if (!(cu > 0.0) || !std::isfinite(cu))
    throw ConfigError("derived per-update compute i*C must be positive and finite");
}

void CodecProfile::validate() const {
  if (!(rho > 0.0) || rho > 1.0 || !std::isfinite(rho))
    throw ConfigError("profile.rho must lie in (0, 1]");
  if (!(op_overhead >= 1.0) || !std::isfinite(op_overhead))
    throw ConfigError("profile.op_overhead must be >= 1");
  if (!(compress_s >= 0.0) || !std::isfinite(compress_s))
    throw ConfigError("profile.compress_s must be >= 0");
  if (!(decompress_s >= 0.0) || !std::isfinite(decompress_s))
    throw ConfigError("profile.decompress_s must be >= 0");
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::vanilla: return "vanilla";
    case Strategy::repetitive_codec: return "repetitive";
    case Strategy::one_time_homomorphic: return "homomorphic";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "vanilla") return Strategy::vanilla;
  if (name == "repetitive") return Strategy::repetitive_codec;
  if (name == "homomorphic") return Strategy::one_time_homomorphic;
  throw ConfigError("unknown strategy '" + name +
                    "' (expected vanilla, repetitive or homomorphic)");
}

}  // namespace psim
