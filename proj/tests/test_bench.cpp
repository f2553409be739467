#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "psim/bench.hpp"

using namespace psim;

namespace {

BenchSpec small_spec(WeightsKind kind, uint64_t bytes) {
  BenchSpec spec;
  spec.blob_bytes = bytes;
  spec.distribution = kind;
  spec.seed = 42;
  spec.repeats = 3;
  return spec;
}

}  // namespace

TEST_CASE("bench spec validation") {
  BenchSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.blob_bytes = 3;  // less than one float
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = BenchSpec{};
  spec.repeats = 4;  // even: a median needs an odd count
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.repeats = 1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.repeats = -3;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("weights kind names round-trip") {
  CHECK(weights_kind_from_string("zeros") == WeightsKind::zeros);
  CHECK(weights_kind_from_string("gaussian") == WeightsKind::gaussian);
  CHECK(weights_kind_from_string("structured") == WeightsKind::structured);
  CHECK(to_string(WeightsKind::structured) == std::string("structured"));
  CHECK_THROWS_AS(weights_kind_from_string("sparse"), ConfigError);
}

TEST_CASE("synthetic weights are sized in whole floats and deterministic") {
  ParamBlob zeros = make_synthetic_weights(small_spec(WeightsKind::zeros, 1024));
  CHECK(zeros.values.size() == 256);
  for (float v : zeros.values) CHECK(v == 0.0f);

  BenchSpec g = small_spec(WeightsKind::gaussian, 1 << 16);
  ParamBlob a = make_synthetic_weights(g);
  ParamBlob b = make_synthetic_weights(g);
  CHECK(a.values == b.values);
  g.seed = 43;
  ParamBlob c = make_synthetic_weights(g);
  CHECK(a.values != c.values);
  CHECK_NOTHROW(a.validate());

  ParamBlob s = make_synthetic_weights(small_spec(WeightsKind::structured, 1 << 16));
  CHECK(s.values.size() == (1 << 16) / 4);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("identity stats: ratio exactly 1, lossless") {
  CodecStats st = bench_codec(Codec::identity(), small_spec(WeightsKind::gaussian, 1 << 20));
  CHECK(st.codec == "identity");
  CHECK(st.original_bytes == 1 << 20);
  CHECK(st.encoded_bytes == 1 << 20);
  CHECK(st.ratio == 1.0);
  CHECK(st.max_abs_err == 0.0);
  CHECK(st.compress_s >= 0.0);
}

TEST_CASE("deflate collapses zero blobs") {
  CodecStats st = bench_codec(Codec::deflate(), small_spec(WeightsKind::zeros, 1 << 20));
  CHECK(st.ratio < 0.01);
  CHECK(st.max_abs_err == 0.0);
  CHECK(st.compress_s > 0.0);
  CHECK(st.decompress_s > 0.0);
}

TEST_CASE("deflate keeps most of a structured blob but compresses some") {
  CodecStats st =
      bench_codec(Codec::deflate(), small_spec(WeightsKind::structured, 4 << 20));
  CHECK(st.ratio > 0.5);
  CHECK(st.ratio < 1.0);
  // Inflate is far cheaper than deflate at these sizes.
  CHECK(st.compress_s > st.decompress_s);
}

TEST_CASE("quant8 stats obey the structural ratio and error bound") {
  CodecStats st = bench_codec(Codec::quant(8), small_spec(WeightsKind::gaussian, 1 << 20));
  CHECK(st.ratio <= 0.27);
  CHECK(st.max_abs_err > 0.0);  // lossy
}

TEST_CASE("ratio is a size property: stable when the blob doubles") {
  CodecStats one =
      bench_codec(Codec::deflate(), small_spec(WeightsKind::structured, 2 << 20));
  CodecStats two =
      bench_codec(Codec::deflate(), small_spec(WeightsKind::structured, 8 << 20));
  CHECK(std::abs(one.ratio - two.ratio) / one.ratio < 0.10);
  // Four times the input takes measurably longer to compress.
  CHECK(two.compress_s > one.compress_s);
}

TEST_CASE("measurements are repeatable where they should be") {
  BenchSpec spec = small_spec(WeightsKind::structured, 1 << 20);
  CodecStats a = bench_codec(Codec::deflate(), spec);
  CodecStats b = bench_codec(Codec::deflate(), spec);
  CHECK(a.encoded_bytes == b.encoded_bytes);  // byte counts, not timings
  CHECK(a.ratio == b.ratio);
  CHECK(a.max_abs_err == b.max_abs_err);
}

TEST_CASE("profile_from_stats carries measurements into the cost model") {
  CodecStats st;
  st.codec = "deflate";
  st.original_bytes = 1000;
  st.encoded_bytes = 927;
  st.ratio = 0.927;
  st.compress_s = 8.079;
  st.decompress_s = 1.898;

  bool clamped = true;
  CodecProfile p = profile_from_stats(st, 1.0, &clamped);
  CHECK_FALSE(clamped);
  CHECK(p.rho == 0.927);
  CHECK(p.op_overhead == 1.0);
  CHECK(p.compress_s == 8.079);
  CHECK(p.decompress_s == 1.898);
  CHECK_NOTHROW(p.validate());

  // An inflating codec clamps to rho = 1 and reports it.
  st.ratio = 1.2;
  CodecProfile q = profile_from_stats(st, 1.0, &clamped);
  CHECK(clamped);
  CHECK(q.rho == 1.0);

  // Homomorphic overhead flows through; invalid overhead is rejected.
  CodecProfile h = profile_from_stats(st, 1.3, nullptr);
  CHECK(h.op_overhead == 1.3);
  CHECK_THROWS_AS(profile_from_stats(st, 0.8, nullptr), ConfigError);
}

TEST_CASE("stats table renders one aligned row per codec") {
  CodecStats st;
  st.codec = "identity";
  st.original_bytes = 1 << 20;
  st.encoded_bytes = 1 << 20;
  st.ratio = 1.0;
  st.compress_s = 0.001;
  st.decompress_s = 0.0005;
  std::vector<CodecStats> rows = {st};
  std::string table = stats_text_table(rows);
  CHECK(table.find("codec") != std::string::npos);
  CHECK(table.find("identity") != std::string::npos);
  CHECK(table.find("ratio") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);  // header + row
}
