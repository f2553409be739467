#include "psim/cli.hpp"

#include <cstdio>
#include <numeric>

#include "psim/cost_model.hpp"
#include "psim/report.hpp"
#include "psim/simulator.hpp"

namespace psim {

namespace {

std::string g6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.output_path.empty())
    out << content;
  else
    write_file(cfg.output_path, content);
}

std::vector<uint32_t> worker_range(const SweepRanges& sweep) {
  std::vector<uint32_t> ms(sweep.m_max - sweep.m_min + 1);
  std::iota(ms.begin(), ms.end(), sweep.m_min);
  return ms;
}

const std::vector<std::string> phase_labels = {
    "local_compute", "worker_compress", "push_transfer", "server_decompress",
    "aggregate",     "server_compress", "broadcast_transfer", "worker_decompress"};

std::vector<double> phase_values(const PhaseBreakdown& p) {
  return {p.local_compute_s, p.worker_compress_s,    p.push_transfer_s,
          p.server_decompress_s, p.aggregate_s,      p.server_compress_s,
          p.broadcast_transfer_s, p.worker_decompress_s};
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const CodecError*>(&e)) return 3;
  if (dynamic_cast<const NetError*>(&e)) return 4;
  return 1;
}

void cmd_model(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  PhaseBreakdown p = update_time(cfg.cluster, cfg.strategy, cfg.profile);
  double sp = cfg.cluster.compute_per_update_s() / p.t_update;
  uint32_t crossover = crossover_workers(cfg.cluster);
  OptimalWorkers opt = optimal_workers(cfg.cluster, cfg.strategy, cfg.profile, cfg.sweep.m_limit);

  char line[160];
  std::snprintf(line, sizeof(line), "%-22s %s\n", "strategy", to_string(cfg.strategy));
  out << line;
  std::snprintf(line, sizeof(line), "%-22s %u\n", "workers", cfg.cluster.workers);
  out << line;
  auto row = [&](const char* name, double v, const char* unit) {
    std::snprintf(line, sizeof(line), "%-22s %s %s\n", name, g6(v).c_str(), unit);
    out << line;
  };
  row("t_cmt", p.t_cmt, "s");
  row("t_tnf", p.t_tnf, "s");
  row("t_update", p.t_update, "s");
  row("speedup", sp, "x");
  std::snprintf(line, sizeof(line), "%-22s %u\n", "crossover_workers", crossover);
  out << line;
  std::snprintf(line, sizeof(line), "%-22s %u (speedup %s)\n", "optimal_workers", opt.workers,
                g6(opt.speedup).c_str());
  out << line;
  std::vector<double> values = phase_values(p);
  for (size_t i = 0; i < phase_labels.size(); ++i)
    row(("phase." + phase_labels[i]).c_str(), values[i], "s");

  if (cfg.output_path.empty()) return;
  std::string echo = config_to_json(cfg).dump();
  switch (cfg.output_format) {
    case OutputFormat::csv: {
      SpeedupCurve curve;
      curve.rows.push_back(SpeedupRow{cfg.cluster.workers, p.t_cmt, p.t_tnf, p.t_update, sp});
      write_file(cfg.output_path, curve_to_csv(curve, echo));
      break;
    }
    case OutputFormat::json: {
      nlohmann::json j = {{"config", config_to_json(cfg)},
                          {"model",
                           {{"breakdown", to_json(p)},
                            {"speedup", sp},
                            {"crossover_workers", crossover},
                            {"optimal_workers",
                             {{"workers", opt.workers}, {"speedup", opt.speedup}}}}}};
      write_file(cfg.output_path, j.dump(2) + "\n");
      break;
    }
    case OutputFormat::svg: {
      // One stacked bar per strategy the config can evaluate.
      std::vector<SvgBar> bars;
      bars.push_back(SvgBar{"vanilla",
                            phase_values(update_time(cfg.cluster, Strategy::vanilla, {}))});
      if (cfg.profile) {
        bars.push_back(SvgBar{
            "repetitive",
            phase_values(update_time(cfg.cluster, Strategy::repetitive_codec, cfg.profile))});
        bars.push_back(SvgBar{
            "homomorphic",
            phase_values(update_time(cfg.cluster, Strategy::one_time_homomorphic, cfg.profile))});
      }
      write_file(cfg.output_path,
                 render_stacked_bar_svg("per-update phase times", "seconds", phase_labels,
                                        bars, echo));
      break;
    }
  }
}

void cmd_sweep(const RunConfig& cfg, const std::string& kind, std::ostream& out) {
  cfg.validate();
  std::string echo = config_to_json(cfg).dump();

  if (kind == "workers") {
    SpeedupCurve curve = sweep_workers(cfg.cluster, cfg.strategy, cfg.profile,
                                       worker_range(cfg.sweep));
    switch (cfg.output_format) {
      case OutputFormat::csv:
        emit(cfg, curve_to_csv(curve, echo), out);
        break;
      case OutputFormat::json:
        emit(cfg,
             nlohmann::json({{"config", config_to_json(cfg)}, {"curve", to_json(curve)}})
                     .dump(2) +
                 "\n",
             out);
        break;
      case OutputFormat::svg: {
        SvgSeries cmt{"t_cmt", {}}, tnf{"t_tnf", {}};
        for (const SpeedupRow& r : curve.rows) {
          cmt.points.push_back({static_cast<double>(r.workers), r.t_cmt});
          tnf.points.push_back({static_cast<double>(r.workers), r.t_tnf});
        }
        emit(cfg,
             render_line_svg("per-update times vs workers", "M (workers)", "seconds",
                             {cmt, tnf}, echo),
             out);
        break;
      }
    }
    return;
  }

  if (kind == "hgrid") {
    HRhoGrid grid = sweep_h_rho(cfg.cluster, cfg.sweep.h_list, cfg.sweep.rho_list);
    switch (cfg.output_format) {
      case OutputFormat::csv:
        emit(cfg, grid_to_csv(grid, cfg.cluster, echo), out);
        break;
      case OutputFormat::json:
        emit(cfg,
             nlohmann::json(
                 {{"config", config_to_json(cfg)}, {"grid", to_json(grid, cfg.cluster)}})
                     .dump(2) +
                 "\n",
             out);
        break;
      case OutputFormat::svg: {
        std::vector<SvgSeries> series;
        for (size_t r = 0; r < grid.rho_list.size(); ++r) {
          SvgSeries s{"rho=" + g6(grid.rho_list[r]), {}};
          for (size_t h = 0; h < grid.h_list.size(); ++h)
            s.points.push_back({grid.h_list[h], grid.at(h, r).breakdown.t_update});
          series.push_back(std::move(s));
        }
        emit(cfg,
             render_line_svg("per-update time vs operation overhead", "h", "seconds", series,
                             echo),
             out);
        break;
      }
    }
    return;
  }

  if (kind == "compare") {
    double h = cfg.profile ? cfg.profile->op_overhead : 1.0;
    std::vector<uint32_t> ms = worker_range(cfg.sweep);
    SpeedupCurve vanilla = sweep_workers(cfg.cluster, Strategy::vanilla, {}, ms);
    std::vector<SpeedupCurve> homo;
    for (double rho : cfg.sweep.rho_list)
      homo.push_back(sweep_workers(cfg.cluster, Strategy::one_time_homomorphic,
                                   CodecProfile{rho, h, 0.0, 0.0}, ms));
    switch (cfg.output_format) {
      case OutputFormat::csv: {
        std::string csv = "M,ideal,vanilla";
        for (double rho : cfg.sweep.rho_list) csv += ",homomorphic_rho" + g6(rho);
        csv += "\n";
        for (size_t i = 0; i < ms.size(); ++i) {
          csv += std::to_string(ms[i]) + "," + g6(ms[i]) + "," + g6(vanilla.rows[i].speedup);
          for (const SpeedupCurve& c : homo) csv += "," + g6(c.rows[i].speedup);
          csv += "\n";
        }
        csv += "# config: " + echo + "\n";
        emit(cfg, csv, out);
        break;
      }
      case OutputFormat::json: {
        nlohmann::json series = nlohmann::json::array();
        auto speedups = [](const SpeedupCurve& c) {
          std::vector<double> v;
          for (const SpeedupRow& r : c.rows) v.push_back(r.speedup);
          return v;
        };
        std::vector<double> ideal(ms.begin(), ms.end());
        series.push_back({{"label", "ideal"}, {"speedup", ideal}});
        series.push_back({{"label", "vanilla"}, {"speedup", speedups(vanilla)}});
        for (size_t r = 0; r < homo.size(); ++r)
          series.push_back({{"label", "homomorphic_rho" + g6(cfg.sweep.rho_list[r])},
                            {"speedup", speedups(homo[r])}});
        emit(cfg,
             nlohmann::json({{"config", config_to_json(cfg)},
                             {"compare", {{"m", ms}, {"series", series}}}})
                     .dump(2) +
                 "\n",
             out);
        break;
      }
      case OutputFormat::svg: {
        std::vector<SvgSeries> series;
        SvgSeries ideal{"ideal", {}}, van{"vanilla", {}};
        for (size_t i = 0; i < ms.size(); ++i) {
          double m = static_cast<double>(ms[i]);
          ideal.points.push_back({m, m});
          van.points.push_back({m, vanilla.rows[i].speedup});
        }
        series.push_back(std::move(ideal));
        series.push_back(std::move(van));
        for (size_t r = 0; r < homo.size(); ++r) {
          SvgSeries s{"homomorphic rho=" + g6(cfg.sweep.rho_list[r]) + " h=" + g6(h), {}};
          for (size_t i = 0; i < ms.size(); ++i)
            s.points.push_back({static_cast<double>(ms[i]), homo[r].rows[i].speedup});
          series.push_back(std::move(s));
        }
        emit(cfg, render_line_svg("speedup vs workers", "M (workers)", "speedup", series, echo),
             out);
        break;
      }
    }
    return;
  }

  throw ConfigError("unknown sweep kind '" + kind + "' (expected workers, hgrid or compare)");
}

void cmd_frontier(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  std::vector<FrontierPoint> points;
  for (double rho : cfg.sweep.rho_list)
    points.push_back(frontier_h_max(cfg.cluster, rho, cfg.target_factor));

  char line[96];
  std::snprintf(line, sizeof(line), "%-10s %-12s %-8s\n", "rho", "h_max", "feasible");
  out << line;
  for (const FrontierPoint& p : points) {
    std::snprintf(line, sizeof(line), "%-10s %-12s %-8s\n", g6(p.rho).c_str(),
                  g6(p.h_max).c_str(), p.feasible() ? "yes" : "no");
    out << line;
  }

  if (cfg.output_path.empty()) return;
  std::string echo = config_to_json(cfg).dump();
  switch (cfg.output_format) {
    case OutputFormat::csv: {
      std::string csv = "rho,h_max,target_factor,feasible\n";
      for (const FrontierPoint& p : points)
        csv += g6(p.rho) + "," + g6(p.h_max) + "," + g6(p.target_factor) + "," +
               (p.feasible() ? "1" : "0") + "\n";
      csv += "# config: " + echo + "\n";
      write_file(cfg.output_path, csv);
      break;
    }
    case OutputFormat::json: {
      nlohmann::json arr = nlohmann::json::array();
      for (const FrontierPoint& p : points) arr.push_back(to_json(p));
      write_file(cfg.output_path,
                 nlohmann::json({{"config", config_to_json(cfg)}, {"frontier", arr}}).dump(2) +
                     "\n");
      break;
    }
    case OutputFormat::svg: {
      SvgSeries hmax{"h_max", {}}, floor{"h=1 feasibility floor", {}};
      for (const FrontierPoint& p : points) hmax.points.push_back({p.rho, p.h_max});
      floor.points.push_back({points.front().rho, 1.0});
      floor.points.push_back({points.back().rho, 1.0});
      write_file(cfg.output_path, render_line_svg("feasibility frontier", "rho", "h_max",
                                                  {hmax, floor}, echo));
      break;
    }
  }
}

void cmd_bench(const BenchArgs& args, std::ostream& out) {
  args.spec.validate();
  if (args.codecs.empty()) throw ConfigError("bench needs at least one codec");
  if (args.op_overhead < 1.0) throw ConfigError("op_overhead must be at least 1");

  std::vector<CodecStats> all;
  for (const std::string& name : args.codecs)
    all.push_back(bench_codec(codec_from_string(name), args.spec));
  out << stats_text_table(all);

  nlohmann::json profiles = nlohmann::json::array();
  for (const CodecStats& s : all) {
    bool clamped = false;
    CodecProfile p = profile_from_stats(s, args.op_overhead, &clamped);
    if (clamped)
      out << "note: " << s.codec << " inflated the blob (ratio " << g6(s.ratio)
          << "); rho clamped to 1\n";
    profiles.push_back({{"codec", s.codec},
                        {"rho", p.rho},
                        {"op_overhead", p.op_overhead},
                        {"compress_s", p.compress_s},
                        {"decompress_s", p.decompress_s},
                        {"rho_clamped", clamped}});
  }

  if (args.output_path.empty()) return;
  nlohmann::json stats = nlohmann::json::array();
  for (const CodecStats& s : all) stats.push_back(to_json(s));
  nlohmann::json j = {{"config",
                       {{"command", "bench"},
                        {"codecs", args.codecs},
                        {"blob_bytes", args.spec.blob_bytes},
                        {"distribution", to_string(args.spec.distribution)},
                        {"seed", args.spec.seed},
                        {"repeats", args.spec.repeats},
                        {"op_overhead", args.op_overhead}}},
                      {"stats", stats},
                      {"profiles", profiles}};
  write_file(args.output_path, j.dump(2) + "\n");
}

void cmd_serve(const ServeArgs& args, std::ostream& out) {
  HarnessServer server(args.server);
  server.start();
  out << "listening on " << args.server.bind_addr << ":" << server.port() << "\n" << std::flush;
  HarnessReport report = server.run();

  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-10s %-12s %-12s %-12s\n", "round", "push_s",
                "aggregate_s", "broadcast_s", "end_to_end_s");
  out << line;
  for (const RoundStats& r : report.rounds) {
    std::snprintf(line, sizeof(line), "%-10u %-10s %-12s %-12s %-12s\n", r.round,
                  g6(r.push_s).c_str(), g6(r.aggregate_s).c_str(), g6(r.broadcast_s).c_str(),
                  g6(r.end_to_end_s).c_str());
    out << line;
  }
  out << "measured transfer (mean)  " << g6(report.measured_transfer_s) << " s\n";
  if (report.modeled_t_tnf_s > 0.0) {
    out << "modeled t_tnf             " << g6(report.modeled_t_tnf_s) << " s\n";
    out << "relative error            " << g6(report.relative_error) << "\n";
  }
  out << "max aggregate error       " << g6(report.max_aggregate_err) << " (bound "
      << g6(report.aggregate_err_bound) << ")\n";

  if (args.output_path.empty()) return;
  nlohmann::json j = {{"config",
                       {{"command", "serve"},
                        {"bind_addr", args.server.bind_addr},
                        {"workers", args.server.workers},
                        {"rounds", args.server.rounds},
                        {"codec", args.server.codec.name()},
                        {"weight_bytes", args.server.weight_bytes},
                        {"chi_bytes_per_s", args.server.chi_bytes_per_s},
                        {"per_link_throttle", args.server.per_link_throttle},
                        {"timeout_s", args.server.timeout_s},
                        {"seed", args.server.seed}}},
                      {"report", to_json(report)}};
  write_file(args.output_path, j.dump(2) + "\n");
}

void cmd_worker(const WorkerArgs& args, std::ostream& out) {
  WorkerReport report = run_worker(args.worker);

  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %-10s %-10s %-10s %-10s %-10s\n", "round",
                "compute_s", "encode_s", "push_s", "wait_s", "decode_s");
  out << line;
  for (const WorkerRoundStats& r : report.rounds) {
    std::snprintf(line, sizeof(line), "%-10u %-10s %-10s %-10s %-10s %-10s\n", r.round,
                  g6(r.compute_s).c_str(), g6(r.encode_s).c_str(), g6(r.push_s).c_str(),
                  g6(r.wait_s).c_str(), g6(r.decode_s).c_str());
    out << line;
  }

  if (args.output_path.empty()) return;
  nlohmann::json j = {{"config",
                       {{"command", "worker"},
                        {"connect_addr", args.worker.connect_addr},
                        {"port", args.worker.port},
                        {"worker_id", args.worker.worker_id},
                        {"rounds", args.worker.rounds},
                        {"codec", args.worker.codec.name()},
                        {"weight_bytes", args.worker.weight_bytes},
                        {"compute_s", args.worker.compute_s},
                        {"seed", args.worker.seed},
                        {"timeout_s", args.worker.timeout_s}}},
                      {"report", to_json(report)}};
  write_file(args.output_path, j.dump(2) + "\n");
}

}  // namespace psim
