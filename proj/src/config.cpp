#include "psim/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace psim {

namespace {

using nlohmann::json;

void require_keys(const json& j, const char* context,
                  std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* k) { return item.key() == k; });
    if (!known)
      throw ConfigError("unknown key '" + item.key() + "' in " + context);
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

ClusterConfig cluster_from_json(const json& j) {
  require_keys(j, "cluster", {"workers", "minibatch_time_s", "iterations", "weight_bytes",
                              "bandwidth_bytes_per_s", "minibatch", "dataset"});
  ClusterConfig c;
  read_field(j, "workers", c.workers);
  read_field(j, "minibatch_time_s", c.minibatch_time_s);
  read_field(j, "iterations", c.iterations);
  read_field(j, "weight_bytes", c.weight_bytes);
  read_field(j, "bandwidth_bytes_per_s", c.bandwidth_bytes_per_s);
  read_field(j, "minibatch", c.minibatch);
  read_field(j, "dataset", c.dataset);
  return c;
}

CodecProfile profile_from_json(const json& j) {
  require_keys(j, "profile", {"rho", "op_overhead", "compress_s", "decompress_s"});
  CodecProfile p;
  read_field(j, "rho", p.rho);
  read_field(j, "op_overhead", p.op_overhead);
  read_field(j, "compress_s", p.compress_s);
  read_field(j, "decompress_s", p.decompress_s);
  return p;
}

SweepRanges sweep_from_json(const json& j) {
  require_keys(j, "sweep", {"m_min", "m_max", "h_list", "rho_list", "m_limit"});
  SweepRanges s;
  read_field(j, "m_min", s.m_min);
  read_field(j, "m_max", s.m_max);
  read_field(j, "h_list", s.h_list);
  read_field(j, "rho_list", s.rho_list);
  read_field(j, "m_limit", s.m_limit);
  return s;
}

}  // namespace

const char* to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::svg: return "svg";
  }
  return "unknown";
}

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "svg") return OutputFormat::svg;
  throw ConfigError("unknown output format '" + name + "' (expected csv, json or svg)");
}

void SweepRanges::validate() const {
  if (m_min < 1) throw ConfigError("sweep m_min must be at least 1");
  if (m_max < m_min) throw ConfigError("sweep m_max must be at least m_min");
  if (m_limit < 1) throw ConfigError("sweep m_limit must be at least 1");
  if (h_list.empty()) throw ConfigError("sweep h_list must be non-empty");
  if (rho_list.empty()) throw ConfigError("sweep rho_list must be non-empty");
  for (double h : h_list)
    if (h < 1.0) throw ConfigError("sweep h values must be at least 1");
  for (double rho : rho_list)
    if (rho <= 0.0 || rho > 1.0) throw ConfigError("sweep rho values must lie in (0, 1]");
}

void RunConfig::validate() const {
  cluster.validate();
  if (profile) profile->validate();
  if (strategy != Strategy::vanilla && !profile)
    throw ConfigError(std::string(to_string(strategy)) + " strategy requires a codec profile");
  sweep.validate();
  if (target_factor < 1.0) throw ConfigError("target_factor must be at least 1");
}

RunConfig config_from_json(const nlohmann::json& root) {
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  const json* jp = &root;
  if (auto it = root.find("config"); it != root.end()) jp = &*it;  // embedded report echo
  const json& j = *jp;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  require_keys(j, "config",
               {"cluster", "strategy", "profile", "sweep", "output", "target_factor", "seed"});
  RunConfig cfg;
  if (auto it = j.find("cluster"); it != j.end()) cfg.cluster = cluster_from_json(*it);
  if (auto it = j.find("strategy"); it != j.end())
    cfg.strategy = strategy_from_string(it->get<std::string>());
  if (auto it = j.find("profile"); it != j.end() && !it->is_null())
    cfg.profile = profile_from_json(*it);
  if (auto it = j.find("sweep"); it != j.end()) cfg.sweep = sweep_from_json(*it);
  if (auto it = j.find("output"); it != j.end()) {
    require_keys(*it, "output", {"path", "format"});
    read_field(*it, "path", cfg.output_path);
    if (auto fit = it->find("format"); fit != it->end())
      cfg.output_format = output_format_from_string(fit->get<std::string>());
  }
  read_field(j, "target_factor", cfg.target_factor);
  read_field(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  json j;
  j["cluster"] = {{"workers", cfg.cluster.workers},
                  {"minibatch_time_s", cfg.cluster.minibatch_time_s},
                  {"iterations", cfg.cluster.iterations},
                  {"weight_bytes", cfg.cluster.weight_bytes},
                  {"bandwidth_bytes_per_s", cfg.cluster.bandwidth_bytes_per_s},
                  {"minibatch", cfg.cluster.minibatch},
                  {"dataset", cfg.cluster.dataset}};
  j["strategy"] = to_string(cfg.strategy);
  if (cfg.profile)
    j["profile"] = {{"rho", cfg.profile->rho},
                    {"op_overhead", cfg.profile->op_overhead},
                    {"compress_s", cfg.profile->compress_s},
                    {"decompress_s", cfg.profile->decompress_s}};
  else
    j["profile"] = nullptr;
  j["sweep"] = {{"m_min", cfg.sweep.m_min},
                {"m_max", cfg.sweep.m_max},
                {"h_list", cfg.sweep.h_list},
                {"rho_list", cfg.sweep.rho_list},
                {"m_limit", cfg.sweep.m_limit}};
  j["output"] = {{"path", cfg.output_path}, {"format", to_string(cfg.output_format)}};
  j["target_factor"] = cfg.target_factor;
  j["seed"] = cfg.seed;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  // CSV reports carry their config in a trailing comment line.
  size_t first_non_space = text.find_first_not_of(" \t\r\n");
  if (first_non_space != std::string::npos && text[first_non_space] != '{') {
    const std::string marker = "# config: ";
    size_t pos = text.rfind(marker);
    if (pos == std::string::npos)
      throw ConfigError("'" + path + "' is neither a JSON config nor a report with a config echo");
    size_t end = text.find('\n', pos);
    text = text.substr(pos + marker.size(),
                       end == std::string::npos ? std::string::npos : end - pos - marker.size());
  }

  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("failed to parse '" + path + "': " + e.what());
  }
}

}  // namespace psim
