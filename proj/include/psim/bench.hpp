#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psim/codec.hpp"
#include "psim/types.hpp"

namespace psim {

enum class WeightsKind { zeros, gaussian, structured };

const char* to_string(WeightsKind kind);
WeightsKind weights_kind_from_string(const std::string& name);

// One codec micro-benchmark: what to generate and how often to repeat the
// timed sections. Times are medians, so repeats must be odd.
struct BenchSpec {
  uint64_t blob_bytes = 23ull << 20;
  WeightsKind distribution = WeightsKind::structured;
  uint64_t seed = 42;
  int repeats = 5;

  void validate() const;
};

// Measured results for one codec on one blob. encoded_bytes counts the codec
// payload only (framing headers are transport, not compression).
struct CodecStats {
  std::string codec;
  uint64_t original_bytes = 0;
  uint64_t encoded_bytes = 0;
  double ratio = 0.0;       // encoded/original
  double compress_s = 0.0;  // median over repeats
  double decompress_s = 0.0;
  double max_abs_err = 0.0;  // roundtrip error, 0 for lossless codecs
};

// Deterministic synthetic weight buffers. "structured" interleaves Gaussian
// noise with occasional runs of a repeated value so DEFLATE finds roughly as
// little redundancy as it does in real trained checkpoints.
ParamBlob make_synthetic_weights(const BenchSpec& spec);

CodecStats bench_codec(const Codec& codec, const BenchSpec& spec);

// Converts a measurement into cost-model inputs. A ratio above 1 means the
// codec inflated the blob; rho is clamped to 1 and *clamped is set so callers
// can warn.
CodecProfile profile_from_stats(const CodecStats& stats, double op_overhead,
                                bool* clamped = nullptr);

// Fixed-width text table, one row per stats entry.
std::string stats_text_table(std::span<const CodecStats> stats);

}  // namespace psim
