// psim: cost modeling, sweeps, codec benchmarking and a live parameter-server
// harness for synchronous-SGD training runs.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "psim/cli.hpp"

namespace {

using psim::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::string output_path;
  std::string format;
  // optional overrides, applied after the config file loads
  uint32_t workers = 0;
  double h = 0.0;
  double rho = 0.0;
  std::string strategy;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (or a report with a config echo)");
  cmd->add_option("-o,--output", f.output_path, "output file path");
  cmd->add_option("--format", f.format, "output format: csv, json or svg");
  cmd->add_option("--workers", f.workers, "override cluster worker count M");
  cmd->add_option("--strategy", f.strategy, "vanilla, repetitive or homomorphic");
  cmd->add_option("--op-overhead", f.h, "codec profile operation overhead h (implies a profile)");
  cmd->add_option("--rho", f.rho, "codec profile compression ratio (implies a profile)");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) cfg = psim::load_config(f.config_path);
  if (!f.output_path.empty()) cfg.output_path = f.output_path;
  if (!f.format.empty()) cfg.output_format = psim::output_format_from_string(f.format);
  if (f.workers > 0) cfg.cluster = cfg.cluster.with_workers(f.workers);
  if (!f.strategy.empty()) cfg.strategy = psim::strategy_from_string(f.strategy);
  if (f.h > 0.0 || f.rho > 0.0) {
    psim::CodecProfile p = cfg.profile.value_or(psim::CodecProfile{});
    if (f.h > 0.0) p.op_overhead = f.h;
    if (f.rho > 0.0) p.rho = f.rho;
    cfg.profile = p;
  }
  cfg.validate();
  return cfg;
}

// "host:port" for the harness subcommands.
void split_addr(const std::string& addr, std::string& host, uint16_t& port) {
  size_t colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw psim::ConfigError("address '" + addr + "' must be host:port");
  host = addr.substr(0, colon);
  int p = 0;
  try {
    p = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw psim::ConfigError("bad port in address '" + addr + "'");
  }
  if (p < 0 || p > 65535) throw psim::ConfigError("port out of range in '" + addr + "'");
  port = static_cast<uint16_t>(p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synchronous-SGD cost model, codec bench and parameter-server harness"};
  app.require_subcommand(1);

  CommonFlags model_flags, sweep_flags, frontier_flags;
  std::string sweep_kind = "workers";
  double target_factor = 0.0;

  CLI::App* model = app.add_subcommand("model", "closed-form per-update times and speedup");
  add_common(model, model_flags);

  CLI::App* sweep = app.add_subcommand("sweep", "curves and grids over M, h and rho");
  add_common(sweep, sweep_flags);
  sweep->add_option("--kind", sweep_kind, "workers, hgrid or compare");

  CLI::App* frontier = app.add_subcommand("frontier", "largest feasible h per rho");
  add_common(frontier, frontier_flags);
  frontier->add_option("--target-factor", target_factor, "per-update budget factor r");

  psim::BenchArgs bench_args;
  std::string bench_distribution = "structured";
  CLI::App* bench = app.add_subcommand("bench", "measure codec stats on synthetic blobs");
  bench->add_option("--codec", bench_args.codecs,
                    "codec to benchmark (repeatable); default: all four");
  bench->add_option("--blob-bytes", bench_args.spec.blob_bytes, "synthetic blob size");
  bench->add_option("--distribution", bench_distribution, "zeros, gaussian or structured");
  bench->add_option("--seed", bench_args.spec.seed, "generator seed");
  bench->add_option("--repeats", bench_args.spec.repeats, "odd repeat count for medians");
  bench->add_option("--op-overhead", bench_args.op_overhead, "h for the derived profiles");
  bench->add_option("-o,--output", bench_args.output_path, "JSON report path");

  psim::ServeArgs serve_args;
  std::string bind_addr = "127.0.0.1:0";
  std::string serve_codec = "identity";
  CLI::App* serve = app.add_subcommand("serve", "run the parameter server");
  serve->add_option("--bind", bind_addr, "bind address host:port (port 0 = ephemeral)");
  serve->add_option("--workers", serve_args.server.workers, "worker connections to expect");
  serve->add_option("--rounds", serve_args.server.rounds, "training rounds");
  serve->add_option("--codec", serve_codec, "identity, deflate, quant8 or quant16");
  serve->add_option("--chi-bytes-per-sec", serve_args.server.chi_bytes_per_s,
                    "ingress throttle rate (0 = unlimited)");
  serve->add_flag("--per-link", serve_args.server.per_link_throttle,
                  "throttle each worker link at chi instead of sharing one rate");
  serve->add_option("--weight-bytes", serve_args.server.weight_bytes, "blob size per push");
  serve->add_option("--seed", serve_args.server.seed, "blob generation seed");
  serve->add_option("--timeout-s", serve_args.server.timeout_s, "per-phase timeout");
  serve->add_option("-o,--output", serve_args.output_path, "JSON report path");

  psim::WorkerArgs worker_args;
  std::string connect_addr = "127.0.0.1:5555";
  std::string worker_codec = "identity";
  double compute_ms = 0.0;
  CLI::App* worker = app.add_subcommand("worker", "run one training worker");
  worker->add_option("--connect", connect_addr, "server address host:port");
  worker->add_option("--worker-id", worker_args.worker.worker_id, "unique worker id");
  worker->add_option("--rounds", worker_args.worker.rounds, "training rounds");
  worker->add_option("--codec", worker_codec, "identity, deflate, quant8 or quant16");
  worker->add_option("--weight-bytes", worker_args.worker.weight_bytes, "blob size per push");
  worker->add_option("--compute-ms", compute_ms, "injected compute sleep per round");
  worker->add_option("--seed", worker_args.worker.seed, "blob generation seed");
  worker->add_option("--timeout-s", worker_args.worker.timeout_s, "per-frame timeout");
  worker->add_option("-o,--output", worker_args.output_path, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (model->parsed()) {
      psim::cmd_model(resolve_config(model_flags), std::cout);
    } else if (sweep->parsed()) {
      psim::cmd_sweep(resolve_config(sweep_flags), sweep_kind, std::cout);
    } else if (frontier->parsed()) {
      RunConfig cfg = resolve_config(frontier_flags);
      if (target_factor > 0.0) cfg.target_factor = target_factor;
      cfg.validate();
      psim::cmd_frontier(cfg, std::cout);
    } else if (bench->parsed()) {
      bench_args.spec.distribution = psim::weights_kind_from_string(bench_distribution);
      psim::cmd_bench(bench_args, std::cout);
    } else if (serve->parsed()) {
      split_addr(bind_addr, serve_args.server.bind_addr, serve_args.server.port);
      serve_args.server.codec = psim::codec_from_string(serve_codec);
      psim::cmd_serve(serve_args, std::cout);
    } else if (worker->parsed()) {
      split_addr(connect_addr, worker_args.worker.connect_addr, worker_args.worker.port);
      worker_args.worker.codec = psim::codec_from_string(worker_codec);
      worker_args.worker.compute_s = compute_ms / 1000.0;
      psim::cmd_worker(worker_args, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return psim::exit_code_for(e);
  }
  return 0;
}
