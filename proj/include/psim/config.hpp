#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psim/types.hpp"

namespace psim {

enum class OutputFormat { csv, json, svg };

const char* to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& name);

struct SweepRanges {
  uint32_t m_min = 1;
  uint32_t m_max = 25;
  std::vector<double> h_list = {1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0};
  std::vector<double> rho_list = {0.2, 0.5};
  uint32_t m_limit = 1024;  // upper bound of the optimal-workers argmax scan

  void validate() const;
};

// Resolved run settings: what the CLI commands consume after merging the
// config file with flag overrides. Every emitted report echoes this record so
// runs can be reproduced from their own outputs.
struct RunConfig {
  ClusterConfig cluster;
  Strategy strategy = Strategy::vanilla;
  std::optional<CodecProfile> profile;
  SweepRanges sweep;
  std::string output_path;  // empty writes to stdout
  OutputFormat output_format = OutputFormat::csv;
  double target_factor = 4.0;  // frontier budget r
  uint64_t seed = 42;

  void validate() const;
};

// Strict parse: unknown keys anywhere are rejected. Accepts either a bare
// config object or a report that embeds one under a top-level "config" key,
// so any emitted JSON report can be fed back in.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

// Loads JSON configs, JSON reports (via their "config" key), or CSV reports
// (via their trailing "# config: ..." comment line).
RunConfig load_config(const std::string& path);

}  // namespace psim
