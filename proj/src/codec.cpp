#include "psim/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace psim {

namespace {

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32le(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
         (static_cast<uint32_t>(b[off + 2]) << 16) |
         (static_cast<uint32_t>(b[off + 3]) << 24);
}

void put_f32le(std::vector<uint8_t>& out, float v) {
  put_u32le(out, std::bit_cast<uint32_t>(v));
}

float get_f32le(std::span<const uint8_t> b, size_t off) {
  return std::bit_cast<float>(get_u32le(b, off));
}

ParamBlob checked_blob(std::vector<float> values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw CodecError("decoded blob contains a non-finite value", i * sizeof(float));
  }
  return ParamBlob{std::move(values)};
}

std::vector<uint8_t> deflate_bytes(std::span<const uint8_t> raw) {
  uLongf cap = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> out(cap);
  int rc = compress2(out.data(), &cap, raw.data(), static_cast<uLong>(raw.size()), 6);
  if (rc != Z_OK) throw CodecError("deflate failed with zlib code " + std::to_string(rc), 0);
  out.resize(cap);
  return out;
}

std::vector<uint8_t> inflate_bytes(std::span<const uint8_t> payload, size_t expect_len) {
  std::vector<uint8_t> out(expect_len);
  z_stream strm{};
  if (inflateInit(&strm) != Z_OK) throw CodecError("zlib inflateInit failed", 0);
  strm.next_in = const_cast<Bytef*>(payload.data());
  strm.avail_in = static_cast<uInt>(payload.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&strm, Z_FINISH);
  size_t consumed = strm.total_in;
  size_t produced = strm.total_out;
  inflateEnd(&strm);
  if (rc == Z_STREAM_END) {
    if (produced != expect_len)
      throw CodecError("deflate payload decodes to " + std::to_string(produced) +
                           " bytes, expected " + std::to_string(expect_len),
                       consumed);
    if (consumed != payload.size())
      throw CodecError("trailing bytes after deflate stream", consumed);
    return out;
  }
  if (rc == Z_BUF_ERROR && strm.avail_in == 0)
    throw CodecError("truncated deflate payload", payload.size());
  throw CodecError("corrupt deflate payload", consumed);
}

}  // namespace

Codec Codec::quant(uint8_t bits) {
  if (bits != 8 && bits != 16)
    throw ConfigError("quant codec supports 8 or 16 bits, got " + std::to_string(bits));
  return {CodecId::quant, bits};
}

const char* Codec::name() const {
  switch (id) {
    case CodecId::identity: return "identity";
    case CodecId::deflate: return "deflate";
    case CodecId::quant: return quant_bits == 16 ? "quant16" : "quant8";
  }
  return "unknown";
}

Codec codec_from_string(const std::string& name) {
  if (name == "identity") return Codec::identity();
  if (name == "deflate") return Codec::deflate();
  if (name == "quant8") return Codec::quant(8);
  if (name == "quant16") return Codec::quant(16);
  throw ConfigError("unknown codec '" + name +
                    "' (expected identity, deflate, quant8 or quant16)");
}

void ParamBlob::validate() const {
  if (values.empty()) throw ConfigError("param blob must hold at least one value");
  for (float v : values)
    if (!std::isfinite(v)) throw ConfigError("param blob values must be finite");
}

std::vector<uint8_t> EncodedBlob::serialize() const {
  std::vector<uint8_t> out;
  out.reserve(9 + payload.size());
  out.push_back(static_cast<uint8_t>(codec_id));
  put_u32le(out, original_count);
  put_u32le(out, static_cast<uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

EncodedBlob EncodedBlob::deserialize(std::span<const uint8_t> bytes) {
  if (bytes.size() < 9) throw CodecError("encoded blob shorter than its header", bytes.size());
  uint8_t id = bytes[0];
  if (id != static_cast<uint8_t>(CodecId::identity) &&
      id != static_cast<uint8_t>(CodecId::deflate) &&
      id != static_cast<uint8_t>(CodecId::quant))
    throw CodecError("unknown codec id " + std::to_string(id), 0);
  EncodedBlob enc;
  enc.codec_id = static_cast<CodecId>(id);
  enc.original_count = get_u32le(bytes, 1);
  uint32_t len = get_u32le(bytes, 5);
  if (bytes.size() - 9 != len)
    throw CodecError("payload length field " + std::to_string(len) + " does not match " +
                         std::to_string(bytes.size() - 9) + " payload bytes",
                     5);
  enc.payload.assign(bytes.begin() + 9, bytes.end());
  return enc;
}

ParamBlob QuantizedBlob::dequantize() const {
  std::vector<float> vals(codes.size());
  double s = scale, z = zero_point;
  for (size_t i = 0; i < codes.size(); ++i)
    vals[i] = static_cast<float>(z + s * static_cast<double>(codes[i]));
  return ParamBlob{std::move(vals)};
}

std::vector<uint8_t> QuantizedBlob::pack_payload() const {
  std::vector<uint8_t> out;
  out.reserve(9 + codes.size() * (bits / 8));
  put_f32le(out, scale);
  put_f32le(out, zero_point);
  out.push_back(bits);
  for (uint32_t q : codes) {
    out.push_back(static_cast<uint8_t>(q));
    if (bits == 16) out.push_back(static_cast<uint8_t>(q >> 8));
  }
  return out;
}

QuantizedBlob QuantizedBlob::unpack_payload(std::span<const uint8_t> payload, uint32_t count) {
  if (payload.size() < 9) throw CodecError("quant payload shorter than its header", payload.size());
  QuantizedBlob q;
  q.scale = get_f32le(payload, 0);
  q.zero_point = get_f32le(payload, 4);
  q.bits = payload[8];
  if (!std::isfinite(q.scale) || q.scale < 0.0f) throw CodecError("bad quant scale", 0);
  if (!std::isfinite(q.zero_point)) throw CodecError("bad quant zero point", 4);
  if (q.bits != 8 && q.bits != 16) throw CodecError("bad quant bit width", 8);
  size_t stride = q.bits / 8;
  if (payload.size() - 9 != static_cast<size_t>(count) * stride)
    throw CodecError("quant payload holds " + std::to_string((payload.size() - 9) / stride) +
                         " codes, expected " + std::to_string(count),
                     9 + std::min<size_t>(payload.size() - 9, count * stride));
  q.codes.resize(count);
  for (size_t i = 0; i < count; ++i) {
    uint32_t v = payload[9 + i * stride];
    if (stride == 2) v |= static_cast<uint32_t>(payload[9 + i * stride + 1]) << 8;
    q.codes[i] = v;
  }
  if (q.scale == 0.0f)
    for (size_t i = 0; i < count; ++i)
      if (q.codes[i] != 0) throw CodecError("constant blob carries a nonzero code", 9 + i * stride);
  return q;
}

QuantizedBlob quantize(const ParamBlob& blob, uint8_t bits) {
  blob.validate();
  if (bits != 8 && bits != 16)
    throw ConfigError("quantize supports 8 or 16 bits, got " + std::to_string(bits));
  auto [lo_it, hi_it] = std::minmax_element(blob.values.begin(), blob.values.end());
  float lo = *lo_it, hi = *hi_it;
  QuantizedBlob q;
  q.bits = bits;
  q.zero_point = lo;
  q.codes.assign(blob.values.size(), 0);
  if (lo == hi) return q;  // constant: scale = 0 sentinel

  double qmax = static_cast<double>(q.max_code());
  double step = (static_cast<double>(hi) - static_cast<double>(lo)) / qmax;
  float s = static_cast<float>(step);
  if (static_cast<double>(s) > step) s = std::nextafterf(s, 0.0f);
  if (s == 0.0f) s = std::numeric_limits<float>::denorm_min();
  q.scale = s;

  double sd = s, zd = lo;
  for (size_t i = 0; i < blob.values.size(); ++i) {
    double code = std::nearbyint((static_cast<double>(blob.values[i]) - zd) / sd);
    q.codes[i] = static_cast<uint32_t>(std::clamp(code, 0.0, qmax));
  }
  return q;
}

EncodedBlob encode(const Codec& codec, const ParamBlob& blob) {
  blob.validate();
  EncodedBlob enc;
  enc.codec_id = codec.id;
  enc.original_count = static_cast<uint32_t>(blob.values.size());
  switch (codec.id) {
    case CodecId::identity: {
      enc.payload.reserve(blob.byte_len());
      for (float v : blob.values) put_f32le(enc.payload, v);
      break;
    }
    case CodecId::deflate: {
      std::vector<uint8_t> raw;
      raw.reserve(blob.byte_len());
      for (float v : blob.values) put_f32le(raw, v);
      enc.payload = deflate_bytes(raw);
      break;
    }
    case CodecId::quant:
      enc.payload = quantize(blob, codec.quant_bits).pack_payload();
      break;
  }
  return enc;
}

ParamBlob decode(const Codec& codec, const EncodedBlob& enc) {
  if (enc.codec_id != codec.id)
    throw CodecError(std::string("codec mismatch: blob was encoded with id ") +
                         std::to_string(static_cast<int>(enc.codec_id)) + ", decoding as " +
                         codec.name(),
                     0);
  size_t n = enc.original_count;
  switch (codec.id) {
    case CodecId::identity: {
      if (enc.payload.size() != n * sizeof(float))
        throw CodecError("identity payload holds " + std::to_string(enc.payload.size()) +
                             " bytes, expected " + std::to_string(n * sizeof(float)),
                         std::min(enc.payload.size(), n * sizeof(float)));
      std::vector<float> vals(n);
      for (size_t i = 0; i < n; ++i) vals[i] = get_f32le(enc.payload, i * 4);
      return checked_blob(std::move(vals));
    }
    case CodecId::deflate: {
      std::vector<uint8_t> raw = inflate_bytes(enc.payload, n * sizeof(float));
      std::vector<float> vals(n);
      for (size_t i = 0; i < n; ++i) vals[i] = get_f32le(raw, i * 4);
      return checked_blob(std::move(vals));
    }
    case CodecId::quant: {
      QuantizedBlob q = QuantizedBlob::unpack_payload(enc.payload,
                                                     enc.original_count);
      return q.dequantize();
    }
  }
  throw CodecError("unreachable codec id", 0);
}

QuantizedBlob h_add(const QuantizedBlob& a, const QuantizedBlob& b) {
  if (a.count() != b.count())
    throw ConfigError("h_add count mismatch: " + std::to_string(a.count()) + " vs " +
                      std::to_string(b.count()));
  QuantizedBlob out;
  out.bits = std::max(a.bits, b.bits);
  double sa = a.scale, sb = b.scale;
  out.zero_point = static_cast<float>(static_cast<double>(a.zero_point) +
                                      static_cast<double>(b.zero_point));
  out.codes.assign(a.count(), 0);
  double s_out = sa + sb;
  if (s_out == 0.0) return out;  // both constant
  out.scale = static_cast<float>(s_out);
  double qmax = static_cast<double>(out.max_code());
  for (size_t i = 0; i < a.codes.size(); ++i) {
    double num = sa * static_cast<double>(a.codes[i]) + sb * static_cast<double>(b.codes[i]);
    double code = std::nearbyint(num / s_out);
    out.codes[i] = static_cast<uint32_t>(std::clamp(code, 0.0, qmax));
  }
  return out;
}

QuantizedBlob h_scale(const QuantizedBlob& a, double alpha) {
  if (!std::isfinite(alpha)) throw ConfigError("h_scale alpha must be finite");
  QuantizedBlob out = a;
  if (alpha == 0.0) {
    out.scale = 0.0f;
    out.zero_point = 0.0f;
    std::fill(out.codes.begin(), out.codes.end(), 0u);
    return out;
  }
  double sa = a.scale, za = a.zero_point;
  if (alpha > 0.0) {
    out.scale = static_cast<float>(alpha * sa);
    out.zero_point = static_cast<float>(alpha * za);
    return out;
  }
  // Negative alpha: reflect the codes so the scale stays non-negative.
  double qmax = static_cast<double>(a.max_code());
  out.scale = static_cast<float>(-alpha * sa);
  out.zero_point = static_cast<float>(alpha * (za + sa * qmax));
  if (out.scale != 0.0f)
    for (size_t i = 0; i < out.codes.size(); ++i)
      out.codes[i] = a.max_code() - a.codes[i];
  return out;
}

QuantizedBlob h_average(std::span<const QuantizedBlob> blobs) {
  if (blobs.empty()) throw ConfigError("h_average needs at least one blob");
  for (const QuantizedBlob& b : blobs)
    if (b.count() != blobs.front().count())
      throw ConfigError("h_average blobs must share one element count");
  QuantizedBlob acc = blobs.front();
  for (size_t i = 1; i < blobs.size(); ++i) acc = h_add(acc, blobs[i]);
  return h_scale(acc, 1.0 / static_cast<double>(blobs.size()));
}

double h_average_error_bound(const QuantizedBlob& result, size_t m, double max_abs_mean) {
  double steps = static_cast<double>(m + 1) / 2.0;
  double meta = 4.0 * std::numeric_limits<float>::epsilon() * std::abs(max_abs_mean);
  return steps * static_cast<double>(result.scale) + meta;
}

}  // namespace psim
