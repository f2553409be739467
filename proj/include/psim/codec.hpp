#pragma once

// Parameter-blob codecs: identity, DEFLATE, and an affine fixed-point
// quantizer whose blobs support add/scale/average directly on the packed
// representation, so a parameter server can aggregate without decompressing.

#include <cstdint>
#include <span>
#include <vector>

#include "psim/types.hpp"

namespace psim {

enum class CodecId : uint8_t {
  identity = 0x01,
  deflate = 0x02,
  quant = 0x03,
};

struct Codec {
  CodecId id = CodecId::identity;
  uint8_t quant_bits = 8;  // only meaningful for CodecId::quant

  static Codec identity() { return {CodecId::identity, 0}; }
  static Codec deflate() { return {CodecId::deflate, 0}; }
  static Codec quant(uint8_t bits);

  // "identity", "deflate", "quant8", "quant16"
  const char* name() const;
};

Codec codec_from_string(const std::string& name);

// Raw float32 weight buffer.
struct ParamBlob {
  std::vector<float> values;

  size_t byte_len() const { return values.size() * sizeof(float); }
  void validate() const;  // non-empty, all finite
};

// Encoded blob plus the envelope needed to frame it on the wire.
// Serialized layout: [u8 codec_id][u32 LE original_count][u32 LE payload_len][payload]
struct EncodedBlob {
  CodecId codec_id = CodecId::identity;
  uint32_t original_count = 0;
  std::vector<uint8_t> payload;

  std::vector<uint8_t> serialize() const;
  static EncodedBlob deserialize(std::span<const uint8_t> bytes);
};

// Affine fixed-point blob: value = zero_point + scale * code with codes in
// [0, 2^bits - 1]. A constant blob is the scale = 0 sentinel with all codes 0.
// Payload layout: [f32 LE scale][f32 LE zero_point][u8 bits][codes LE, row-major]
struct QuantizedBlob {
  float scale = 0.0f;
  float zero_point = 0.0f;
  uint8_t bits = 8;
  std::vector<uint32_t> codes;

  uint32_t max_code() const { return (1u << bits) - 1u; }
  size_t count() const { return codes.size(); }

  ParamBlob dequantize() const;
  std::vector<uint8_t> pack_payload() const;
  static QuantizedBlob unpack_payload(std::span<const uint8_t> payload, uint32_t count);
};

// Affine quantization onto 2^bits levels. The stored scale is the largest
// float32 not above (max-min)/(2^bits-1), so the top of the range stays
// representable; codes are rounded half-to-even against that stored scale.
// Per-element error is at most scale/2.
QuantizedBlob quantize(const ParamBlob& blob, uint8_t bits);

EncodedBlob encode(const Codec& codec, const ParamBlob& blob);
ParamBlob decode(const Codec& codec, const EncodedBlob& enc);

// Compressed-domain sum. The result lives on the merged grid
// (scale_a + scale_b, zero_a + zero_b); each output code is the
// scale-weighted mean of the input codes, so the result dequantizes to
// deq(a) + deq(b) within one output step without clamping, including the
// scale = 0 constant sentinel on either side.
QuantizedBlob h_add(const QuantizedBlob& a, const QuantizedBlob& b);

// Compressed-domain scaling. Positive alpha touches only scale/zero_point;
// negative alpha also reflects the codes (exact); alpha = 0 yields the
// constant zero blob.
QuantizedBlob h_scale(const QuantizedBlob& a, double alpha);

// Compressed-domain mean: h_scale(fold(h_add), 1/M). Elementwise error vs the
// float-domain mean of the dequantized inputs is bounded by
// h_average_error_bound of the result.
QuantizedBlob h_average(std::span<const QuantizedBlob> blobs);

// (M+1)/2 output steps plus float32 metadata rounding slack.
double h_average_error_bound(const QuantizedBlob& result, size_t m, double max_abs_mean);

}  // namespace psim
