#include "psim/simulator.hpp"

#include <random>

#include "psim/cost_model.hpp"

namespace psim {

namespace {

// Scales every block by 1 + frac*u. Kept out of the zero-jitter path so the
// default simulation stays bit-identical to the closed form.
class Jitter {
 public:
  Jitter(double frac, uint64_t seed) : frac_(frac), rng_(seed) {}
  double apply(double total) {
    if (frac_ == 0.0) return total;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return total * (1.0 + frac_ * u(rng_));
  }

 private:
  double frac_;
  std::mt19937_64 rng_;
};

void push_event(std::vector<SimEvent>* trace, const char* label, uint64_t count, double total) {
  if (trace) trace->push_back(SimEvent{label, count, total});
}

}  // namespace

PhaseBreakdown simulate_update(const ClusterConfig& cfg, Strategy strategy,
                               const std::optional<CodecProfile>& profile,
                               const SimOptions& options, std::vector<SimEvent>* trace) {
  cfg.validate();
  if (options.jitter_frac < 0.0 || options.jitter_frac >= 1.0)
    throw ConfigError("jitter_frac must lie in [0, 1)");
  if (strategy != Strategy::vanilla) {
    if (!profile) throw ConfigError("strategy requires a codec profile");
    profile->validate();
  }

  Jitter jitter(options.jitter_frac, options.jitter_seed);
  uint64_t m = cfg.workers;
  PhaseBreakdown p;

  // Each block total uses the same expression as the closed-form model; the
  // trace only decomposes it into events.
  switch (strategy) {
    case Strategy::vanilla: {
      p.local_compute_s = jitter.apply(computation_time(cfg));
      push_event(trace, "local_compute", cfg.iterations, p.local_compute_s);
      // The analytic transfer term covers the whole round trip; the model
      // books it on the push phase, so the broadcast block carries zero time.
      p.push_transfer_s = jitter.apply(transfer_time(cfg));
      push_event(trace, "push", m, p.push_transfer_s);
      push_event(trace, "aggregate", 1, 0.0);
      push_event(trace, "broadcast", m, p.broadcast_transfer_s);
      break;
    }
    case Strategy::repetitive_codec: {
      const CodecProfile& prof = *profile;
      p.local_compute_s = jitter.apply(computation_time(cfg));
      push_event(trace, "local_compute", cfg.iterations, p.local_compute_s);
      p.worker_compress_s = jitter.apply(prof.compress_s);  // all workers in parallel
      push_event(trace, "worker_compress", m, p.worker_compress_s);
      p.push_transfer_s = jitter.apply(prof.rho * transfer_time(cfg));
      push_event(trace, "push", m, p.push_transfer_s);
      p.server_decompress_s =
          jitter.apply(static_cast<double>(cfg.workers) * prof.decompress_s);
      push_event(trace, "server_decompress", m, p.server_decompress_s);
      push_event(trace, "aggregate", 1, 0.0);
      p.server_compress_s = jitter.apply(prof.compress_s);
      push_event(trace, "server_compress", 1, p.server_compress_s);
      push_event(trace, "broadcast", m, p.broadcast_transfer_s);
      p.worker_decompress_s = jitter.apply(prof.decompress_s);  // parallel again
      push_event(trace, "worker_decompress", m, p.worker_decompress_s);
      break;
    }
    case Strategy::one_time_homomorphic: {
      const CodecProfile& prof = *profile;
      p.local_compute_s = jitter.apply(prof.op_overhead * computation_time(cfg));
      push_event(trace, "local_compute", cfg.iterations, p.local_compute_s);
      p.push_transfer_s = jitter.apply(prof.rho * transfer_time(cfg));
      push_event(trace, "push", m, p.push_transfer_s);
      push_event(trace, "aggregate", 1, 0.0);
      push_event(trace, "broadcast", m, p.broadcast_transfer_s);
      break;
    }
  }
  p.finalize();
  return p;
}

TrainingRun simulate_training(const ClusterConfig& cfg, Strategy strategy,
                              const std::optional<CodecProfile>& profile, uint64_t updates) {
  if (updates < 1) throw ConfigError("updates must be at least 1");
  PhaseBreakdown per_update = simulate_update(cfg, strategy, profile);

  TrainingRun run;
  run.updates.assign(updates, per_update);
  run.total_s = static_cast<double>(updates) * per_update.t_update;
  if (strategy == Strategy::one_time_homomorphic)
    run.total_s = profile->compress_s + run.total_s + profile->decompress_s;
  return run;
}

SpeedupCurve sweep_workers(const ClusterConfig& cfg, Strategy strategy,
                           const std::optional<CodecProfile>& profile,
                           const std::vector<uint32_t>& m_range) {
  if (m_range.empty()) throw ConfigError("worker sweep needs at least one M");
  for (size_t i = 1; i < m_range.size(); ++i)
    if (m_range[i] <= m_range[i - 1])
      throw ConfigError("worker sweep range must be strictly ascending");

  SpeedupCurve curve;
  curve.rows.reserve(m_range.size());
  for (uint32_t m : m_range) {
    ClusterConfig c = cfg.with_workers(m);
    PhaseBreakdown p = simulate_update(c, strategy, profile);
    curve.rows.push_back(SpeedupRow{m, p.t_cmt, p.t_tnf, p.t_update,
                                    c.compute_per_update_s() / p.t_update});
  }
  return curve;
}

HRhoGrid sweep_h_rho(const ClusterConfig& cfg, const std::vector<double>& h_list,
                     const std::vector<double>& rho_list) {
  if (h_list.empty() || rho_list.empty()) throw ConfigError("h/rho grid must be non-empty");
  for (double h : h_list)
    if (h < 1.0) throw ConfigError("grid h values must be at least 1");
  for (double rho : rho_list)
    if (rho <= 0.0 || rho > 1.0) throw ConfigError("grid rho values must lie in (0, 1]");

  HRhoGrid grid;
  grid.h_list = h_list;
  grid.rho_list = rho_list;
  grid.cells.reserve(h_list.size() * rho_list.size());
  for (double h : h_list) {
    for (double rho : rho_list) {
      CodecProfile prof{rho, h, 0.0, 0.0};
      HRhoCell cell;
      cell.h = h;
      cell.rho = rho;
      cell.breakdown = simulate_update(cfg, Strategy::one_time_homomorphic, prof);
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

}  // namespace psim
