#include "psim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace psim {

namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return xs[xs.size() / 2];
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(WeightsKind kind) {
  switch (kind) {
    case WeightsKind::zeros: return "zeros";
    case WeightsKind::gaussian: return "gaussian";
    case WeightsKind::structured: return "structured";
  }
  return "unknown";
}

WeightsKind weights_kind_from_string(const std::string& name) {
  if (name == "zeros") return WeightsKind::zeros;
  if (name == "gaussian") return WeightsKind::gaussian;
  if (name == "structured") return WeightsKind::structured;
  throw ConfigError("unknown weights kind '" + name +
                    "' (expected zeros, gaussian or structured)");
}

void BenchSpec::validate() const {
  if (blob_bytes < 4) throw ConfigError("blob_bytes must be at least 4 (one float)");
  if (repeats < 3) throw ConfigError("repeats must be at least 3");
  if (repeats % 2 == 0) throw ConfigError("repeats must be odd so the median is well-defined");
}

ParamBlob make_synthetic_weights(const BenchSpec& spec) {
  spec.validate();
  size_t count = static_cast<size_t>(spec.blob_bytes / 4);
  std::vector<float> values(count, 0.0f);
  if (spec.distribution == WeightsKind::zeros) return ParamBlob{std::move(values)};

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 0.05);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> run_len(16, 64);

  if (spec.distribution == WeightsKind::gaussian) {
    for (size_t i = 0; i < count; ++i) values[i] = static_cast<float>(gauss(rng));
    return ParamBlob{std::move(values)};
  }

  // structured: mostly noise, with sparse runs of a repeated value. Run
  // density (~0.25% starts, lengths 16..64) is tuned so DEFLATE lands in the
  // mildly-compressible band seen on trained checkpoints.
  size_t i = 0;
  while (i < count) {
    if (uni(rng) < 0.0025) {
      float v = static_cast<float>(gauss(rng));
      int len = run_len(rng);
      for (int k = 0; k < len && i < count; ++k) values[i++] = v;
    } else {
      values[i++] = static_cast<float>(gauss(rng));
    }
  }
  return ParamBlob{std::move(values)};
}

CodecStats bench_codec(const Codec& codec, const BenchSpec& spec) {
  spec.validate();
  ParamBlob blob = make_synthetic_weights(spec);

  CodecStats stats;
  stats.codec = codec.name();
  stats.original_bytes = blob.byte_len();

  std::vector<double> enc_times, dec_times;
  enc_times.reserve(spec.repeats);
  dec_times.reserve(spec.repeats);

  EncodedBlob enc;
  for (int r = 0; r < spec.repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    enc = encode(codec, blob);
    enc_times.push_back(seconds_since(t0));
  }
  ParamBlob out;
  for (int r = 0; r < spec.repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    out = decode(codec, enc);
    dec_times.push_back(seconds_since(t0));
  }

  stats.encoded_bytes = enc.payload.size();
  stats.ratio = static_cast<double>(stats.encoded_bytes) / static_cast<double>(stats.original_bytes);
  stats.compress_s = median(std::move(enc_times));
  stats.decompress_s = median(std::move(dec_times));

  double err = 0.0;
  for (size_t k = 0; k < blob.values.size(); ++k)
    err = std::max(err, std::abs(static_cast<double>(out.values[k]) -
                                 static_cast<double>(blob.values[k])));
  stats.max_abs_err = err;
  return stats;
}

CodecProfile profile_from_stats(const CodecStats& stats, double op_overhead, bool* clamped) {
  if (stats.ratio <= 0.0) throw ConfigError("codec stats ratio must be positive");
  bool over = stats.ratio > 1.0;
  if (clamped) *clamped = over;
  CodecProfile profile;
  profile.rho = over ? 1.0 : stats.ratio;
  profile.op_overhead = op_overhead;
  profile.compress_s = stats.compress_s;
  profile.decompress_s = stats.decompress_s;
  profile.validate();
  return profile;
}

std::string stats_text_table(std::span<const CodecStats> stats) {
  std::string out;
  char line[192];
  std::snprintf(line, sizeof(line), "%-10s %14s %14s %9s %12s %14s %12s\n", "codec",
                "original_B", "encoded_B", "ratio", "compress_s", "decompress_s", "max_abs_err");
  out += line;
  for (const CodecStats& s : stats) {
    std::snprintf(line, sizeof(line), "%-10s %14llu %14llu %9.4f %12.6f %14.6f %12.3g\n",
                  s.codec.c_str(), static_cast<unsigned long long>(s.original_bytes),
                  static_cast<unsigned long long>(s.encoded_bytes), s.ratio, s.compress_s,
                  s.decompress_s, s.max_abs_err);
    out += line;
  }
  return out;
}

}  // namespace psim
