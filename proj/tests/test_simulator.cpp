#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "psim/cost_model.hpp"
#include "psim/simulator.hpp"

using namespace psim;

namespace {

ClusterConfig reference_config() { return ClusterConfig{}; }

CodecProfile gzip_profile() {
  CodecProfile p;
  p.rho = 1.0 / 1.079;
  p.op_overhead = 1.0;
  p.compress_s = 8.079;
  p.decompress_s = 1.898;
  return p;
}

CodecProfile homomorphic_profile(double h, double rho) {
  CodecProfile p;
  p.rho = rho;
  p.op_overhead = h;
  p.compress_s = 8.079;
  p.decompress_s = 1.898;
  return p;
}

ClusterConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<uint32_t> workers(1, 64);
  std::uniform_real_distribution<double> minibatch_time(0.001, 2.0);
  std::uniform_int_distribution<uint32_t> iterations(1, 400);
  std::uniform_int_distribution<uint64_t> weight_bytes(1 << 10, 1 << 30);
  std::uniform_real_distribution<double> bandwidth(1e6, 1e9);
  ClusterConfig cfg;
  cfg.workers = workers(rng);
  cfg.minibatch_time_s = minibatch_time(rng);
  cfg.iterations = iterations(rng);
  cfg.weight_bytes = weight_bytes(rng);
  cfg.bandwidth_bytes_per_s = bandwidth(rng);
  cfg.minibatch = std::max<uint64_t>(256, cfg.workers);
  return cfg;
}

CodecProfile random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> rho(0.01, 1.0);
  std::uniform_real_distribution<double> h(1.0, 3.0);
  std::uniform_real_distribution<double> secs(0.0, 10.0);
  CodecProfile p;
  p.rho = rho(rng);
  p.op_overhead = h(rng);
  p.compress_s = secs(rng);
  p.decompress_s = secs(rng);
  return p;
}

bool same_breakdown(const PhaseBreakdown& a, const PhaseBreakdown& b) {
  return a.local_compute_s == b.local_compute_s &&
         a.worker_compress_s == b.worker_compress_s &&
         a.push_transfer_s == b.push_transfer_s &&
         a.server_decompress_s == b.server_decompress_s && a.aggregate_s == b.aggregate_s &&
         a.server_compress_s == b.server_compress_s &&
         a.broadcast_transfer_s == b.broadcast_transfer_s &&
         a.worker_decompress_s == b.worker_decompress_s && a.t_cmt == b.t_cmt &&
         a.t_tnf == b.t_tnf && a.t_update == b.t_update;
}

}  // namespace

TEST_CASE("zero-jitter simulation equals the closed form bit for bit") {
  ClusterConfig cfg = reference_config();
  CHECK(same_breakdown(simulate_update(cfg, Strategy::vanilla),
                       update_time(cfg, Strategy::vanilla)));
  CHECK(same_breakdown(simulate_update(cfg, Strategy::repetitive_codec, gzip_profile()),
                       update_time(cfg, Strategy::repetitive_codec, gzip_profile())));
  CHECK(same_breakdown(
      simulate_update(cfg, Strategy::one_time_homomorphic, homomorphic_profile(1.3, 0.2)),
      update_time(cfg, Strategy::one_time_homomorphic, homomorphic_profile(1.3, 0.2))));

  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    ClusterConfig c = random_config(rng);
    CodecProfile prof = random_profile(rng);
    for (Strategy s :
         {Strategy::vanilla, Strategy::repetitive_codec, Strategy::one_time_homomorphic}) {
      CHECK(same_breakdown(simulate_update(c, s, prof), update_time(c, s, prof)));
    }
  }
}

TEST_CASE("the event trace decomposes each phase without re-summing") {
  ClusterConfig cfg = reference_config();
  std::vector<SimEvent> trace;
  PhaseBreakdown p = simulate_update(cfg, Strategy::vanilla, std::nullopt, {}, &trace);
  REQUIRE(trace.size() == 4);
  CHECK(trace[0].label == "local_compute");
  CHECK(trace[0].count == 200);  // i iterations
  CHECK(trace[0].total_s == p.local_compute_s);
  CHECK(trace[1].label == "push");
  CHECK(trace[1].count == 16);  // one push per worker
  CHECK(trace[1].total_s == p.push_transfer_s);
  CHECK(trace[2].label == "aggregate");
  CHECK(trace[2].count == 1);
  CHECK(trace[2].total_s == 0.0);  // analytic model books aggregation at zero
  CHECK(trace[3].label == "broadcast");
  CHECK(trace[3].count == 16);
  CHECK(trace[3].total_s == 0.0);  // round trip is booked on the push phase

  double sum = 0.0;
  for (const SimEvent& e : trace) sum += e.total_s;
  CHECK(sum == p.t_update);

  trace.clear();
  simulate_update(cfg, Strategy::repetitive_codec, gzip_profile(), {}, &trace);
  REQUIRE(trace.size() == 8);
  CHECK(trace[1].label == "worker_compress");
  CHECK(trace[1].count == 16);
  CHECK(trace[1].total_s == 8.079);  // parallel: wall time of one compress
  CHECK(trace[3].label == "server_decompress");
  CHECK(trace[3].total_s == 16.0 * 1.898);  // sequential: M decodes accumulate
  CHECK(trace[5].label == "server_compress");
  CHECK(trace[5].count == 1);
  CHECK(trace[7].label == "worker_decompress");
  CHECK(trace[7].total_s == 1.898);

  trace.clear();
  simulate_update(cfg, Strategy::one_time_homomorphic, homomorphic_profile(1.3, 0.2), {},
                  &trace);
  REQUIRE(trace.size() == 4);
}

TEST_CASE("single-worker cluster degenerates cleanly") {
  ClusterConfig cfg = reference_config().with_workers(1);
  PhaseBreakdown p = simulate_update(cfg, Strategy::vanilla);
  CHECK(p.t_cmt == 100.0);
  CHECK(p.push_transfer_s == 1.954545664);
  CHECK(p.t_tnf == 1.954545663999994);  // sealed as t_update - t_cmt
  CHECK(p.t_update == p.t_cmt + p.t_tnf);
}

TEST_CASE("jitter perturbs totals but stays reproducible") {
  ClusterConfig cfg = reference_config();
  SimOptions noisy;
  noisy.jitter_frac = 0.1;
  noisy.jitter_seed = 7;
  PhaseBreakdown a = simulate_update(cfg, Strategy::vanilla, std::nullopt, noisy);
  PhaseBreakdown b = simulate_update(cfg, Strategy::vanilla, std::nullopt, noisy);
  CHECK(a.t_update == b.t_update);
  CHECK(a.t_update != update_time(cfg, Strategy::vanilla).t_update);
  // Within the advertised +/-10% per phase.
  CHECK(a.local_compute_s > 0.9 * 6.25);
  CHECK(a.local_compute_s < 1.1 * 6.25);

  noisy.jitter_seed = 8;
  PhaseBreakdown c = simulate_update(cfg, Strategy::vanilla, std::nullopt, noisy);
  CHECK(a.t_update != c.t_update);

  SimOptions bad;
  bad.jitter_frac = 1.0;
  CHECK_THROWS_AS(simulate_update(cfg, Strategy::vanilla, std::nullopt, bad), ConfigError);
}

TEST_CASE("training totals: one-time codec pays its cost once") {
  ClusterConfig cfg = reference_config();
  TrainingRun vanilla = simulate_training(cfg, Strategy::vanilla, std::nullopt, 10);
  CHECK(vanilla.total_s == 375.2273062400001);
  CHECK(vanilla.updates.size() == 10);
  CHECK(vanilla.updates[0].t_update == 37.522730624000005);

  TrainingRun onetime =
      simulate_training(cfg, Strategy::one_time_homomorphic, homomorphic_profile(1.3, 0.2), 10);
  CHECK(onetime.total_s == 153.772461248);

  TrainingRun repetitive =
      simulate_training(cfg, Strategy::repetitive_codec, gzip_profile(), 10);
  CHECK(repetitive.total_s == 836.5706823354958);

  // The one-shot codec tax amortizes; the repetitive one never does.
  CHECK(onetime.total_s < vanilla.total_s);
  CHECK(vanilla.total_s < repetitive.total_s);

  TrainingRun single = simulate_training(cfg, Strategy::vanilla, std::nullopt, 1);
  CHECK(single.total_s == 37.522730624000005);

  CHECK_THROWS_AS(simulate_training(cfg, Strategy::vanilla, std::nullopt, 0), ConfigError);
}

TEST_CASE("worker sweep walks the range and carries the speedup") {
  ClusterConfig cfg = reference_config();
  std::vector<uint32_t> range;
  for (uint32_t m = 1; m <= 25; ++m) range.push_back(m);
  SpeedupCurve curve = sweep_workers(cfg, Strategy::vanilla, std::nullopt, range);
  REQUIRE(curve.rows.size() == 25);
  CHECK(curve.rows[0].workers == 1);
  CHECK(curve.rows[0].speedup < 1.0);
  CHECK(curve.rows[15].workers == 16);
  CHECK(curve.rows[15].t_update == 37.522730624000005);
  CHECK(curve.rows[15].speedup == 2.665051245925017);
  for (size_t i = 1; i < curve.rows.size(); ++i) {
    CHECK(curve.rows[i].t_cmt < curve.rows[i - 1].t_cmt);
    CHECK(curve.rows[i].t_tnf > curve.rows[i - 1].t_tnf);
  }

  // Single-entry range reduces to one simulated update.
  SpeedupCurve one = sweep_workers(cfg, Strategy::vanilla, std::nullopt, {16});
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].t_update == 37.522730624000005);

  // With a nearly free transfer the speedup approaches the ideal M.
  CodecProfile nearly_free;
  nearly_free.rho = 1e-9;
  nearly_free.op_overhead = 1.0;
  SpeedupCurve ideal =
      sweep_workers(cfg, Strategy::one_time_homomorphic, nearly_free, range);
  for (const SpeedupRow& row : ideal.rows)
    CHECK(row.speedup == doctest::Approx(row.workers).epsilon(1e-4));

  CHECK_THROWS_AS(sweep_workers(cfg, Strategy::vanilla, std::nullopt, {}), ConfigError);
  CHECK_THROWS_AS(sweep_workers(cfg, Strategy::vanilla, std::nullopt, {4, 4}), ConfigError);
  CHECK_THROWS_AS(sweep_workers(cfg, Strategy::vanilla, std::nullopt, {4, 2}), ConfigError);
}

TEST_CASE("h/rho grid covers the cross product in row-major order") {
  ClusterConfig cfg = reference_config();
  std::vector<double> h_list = {1.0, 1.5, 2.0};
  std::vector<double> rho_list = {0.2, 0.5};
  HRhoGrid grid = sweep_h_rho(cfg, h_list, rho_list);
  REQUIRE(grid.cells.size() == 6);
  CHECK(grid.at(0, 0).h == 1.0);
  CHECK(grid.at(0, 0).rho == 0.2);
  CHECK(grid.at(0, 0).breakdown.t_update == 12.504546124800001);
  CHECK(grid.at(2, 1).h == 2.0);
  CHECK(grid.at(2, 1).rho == 0.5);
  CHECK(grid.at(2, 1).breakdown.t_update == 28.136365312000002);

  // t_update grows along both axes.
  for (size_t hi = 0; hi < h_list.size(); ++hi)
    for (size_t ri = 1; ri < rho_list.size(); ++ri)
      CHECK(grid.at(hi, ri).breakdown.t_update > grid.at(hi, ri - 1).breakdown.t_update);
  for (size_t ri = 0; ri < rho_list.size(); ++ri)
    for (size_t hi = 1; hi < h_list.size(); ++hi)
      CHECK(grid.at(hi, ri).breakdown.t_update > grid.at(hi - 1, ri).breakdown.t_update);

  // h = 1, rho = 1 with free codec stages is exactly vanilla.
  HRhoGrid degenerate = sweep_h_rho(cfg, {1.0}, {1.0});
  CHECK(degenerate.at(0, 0).breakdown.t_update ==
        update_time(cfg, Strategy::vanilla).t_update);

  CHECK_THROWS_AS(sweep_h_rho(cfg, {}, {0.5}), ConfigError);
  CHECK_THROWS_AS(sweep_h_rho(cfg, {0.9}, {0.5}), ConfigError);
  CHECK_THROWS_AS(sweep_h_rho(cfg, {1.5}, {0.0}), ConfigError);
  CHECK_THROWS_AS(sweep_h_rho(cfg, {1.5}, {1.2}), ConfigError);
}

TEST_CASE("strategies needing profiles are rejected without one") {
  ClusterConfig cfg = reference_config();
  CHECK_THROWS_AS(simulate_update(cfg, Strategy::repetitive_codec), ConfigError);
  CHECK_THROWS_AS(simulate_training(cfg, Strategy::one_time_homomorphic, std::nullopt, 5),
                  ConfigError);
}
