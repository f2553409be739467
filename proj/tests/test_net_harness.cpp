#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "psim/frame.hpp"
#include "psim/net_harness.hpp"
#include "psim/throttle.hpp"

using namespace psim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Minimal blocking client for protocol-level tests; run_worker is exercised
// separately, this one lets a test misbehave on purpose. Throws plain
// runtime_errors so it can run safely inside helper threads.
class RawClient {
 public:
  explicit RawClient(uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr) != 1)
      throw std::runtime_error("inet_pton failed");
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      throw std::runtime_error("connect failed");
  }
  ~RawClient() { close(); }

  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void send_frame(const Frame& f) {
    std::vector<uint8_t> bytes = f.serialize();
    size_t sent = 0;
    while (sent < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) throw std::runtime_error("send failed");
      sent += static_cast<size_t>(n);
    }
  }

  void send_hello(uint32_t worker_id) {
    Frame hello;
    hello.msg_type = MsgType::hello;
    hello.round = 0;
    hello.payload = {static_cast<uint8_t>(worker_id), static_cast<uint8_t>(worker_id >> 8),
                     static_cast<uint8_t>(worker_id >> 16),
                     static_cast<uint8_t>(worker_id >> 24)};
    send_frame(hello);
  }

  Frame read_frame() {
    uint8_t header[Frame::header_len];
    read_exact(header, sizeof(header));
    FrameHeader h =
        parse_frame_header(std::span<const uint8_t, Frame::header_len>(header));
    Frame f;
    f.msg_type = h.msg_type;
    f.round = h.round;
    f.payload.resize(h.payload_len);
    read_exact(f.payload.data(), f.payload.size());
    return f;
  }

 private:
  void read_exact(uint8_t* dst, size_t n) {
    size_t got = 0;
    while (got < n) {
      ssize_t r = ::recv(fd_, dst + got, n - got, 0);
      if (r <= 0) throw std::runtime_error("recv failed");
      got += static_cast<size_t>(r);
    }
  }

  int fd_ = -1;
};

uint16_t unused_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  socklen_t len = sizeof(addr);
  REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
  uint16_t port = ntohs(addr.sin_port);
  ::close(fd);
  return port;
}

// Collects worker-thread failures so doctest never has to assert off the
// main thread's happy path.
struct WorkerErrors {
  std::vector<std::string> messages;
  std::mutex mu;

  void capture(const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> g(mu);
      messages.push_back(e.what());
    }
  }

  std::string joined() {
    std::lock_guard<std::mutex> g(mu);
    std::string out;
    for (const std::string& m : messages) out += m + "; ";
    return out;
  }
};

}  // namespace

TEST_CASE("frames round-trip through serialize/parse") {
  Frame f;
  f.msg_type = MsgType::push;
  f.round = 313;
  f.payload = {1, 2, 3, 4, 5};
  std::vector<uint8_t> bytes = f.serialize();
  CHECK(bytes.size() == Frame::header_len + 5);
  Frame g = parse_frame(bytes);
  CHECK(g.msg_type == MsgType::push);
  CHECK(g.round == 313);
  CHECK(g.payload == f.payload);

  CHECK(to_string(MsgType::global) == std::string("GLOBAL"));
}

TEST_CASE("frame parsing rejects mutations without crashing") {
  Frame f;
  f.msg_type = MsgType::global;
  f.round = 7;
  f.payload = {9, 8, 7, 6};
  std::vector<uint8_t> base = f.serialize();

  std::mt19937_64 rng(1234);
  int rejected = 0;
  for (int i = 0; i < 500; ++i) {
    std::vector<uint8_t> bytes = base;
    size_t pos = rng() % bytes.size();
    bytes[pos] ^= static_cast<uint8_t>(1 + rng() % 255);
    try {
      Frame g = parse_frame(bytes);
      // Mutations confined to round or payload still parse; that's fine.
      CHECK(g.payload.size() == f.payload.size());
    } catch (const NetError&) {
      ++rejected;  // type or length damage must surface as NetError
    }
  }
  CHECK(rejected > 0);

  // Truncation and oversized length fields are refused too.
  std::vector<uint8_t> shorty(base.begin(), base.begin() + 4);
  CHECK_THROWS_AS(parse_frame(shorty), NetError);
  std::vector<uint8_t> liar = base;
  liar[5] = 0xFF;
  liar[6] = 0xFF;
  liar[7] = 0xFF;
  liar[8] = 0xFF;  // length field claims 4 GiB
  CHECK_THROWS_AS(parse_frame(liar), NetError);
}

TEST_CASE("token bucket paces a fixed rate from an empty start") {
  // 2 MB at 1 MB/s must take at least 2 s: the bucket starts empty.
  Clock::time_point t0 = Clock::now();
  TokenBucket slow(1e6);
  CHECK(slow.is_limited());
  CHECK(slow.rate_bytes_per_s() == 1e6);
  size_t left = 2000000;
  while (left > 0) {
    size_t chunk = std::min<size_t>(left, 64 * 1024);
    slow.consume(chunk);
    left -= chunk;
  }
  double elapsed = seconds_since(t0);
  CHECK(elapsed >= 2.0);
  CHECK(elapsed < 2.3);  // generous: scheduler noise only, no extra waits

  // 10 MB at 10 MB/s lands in [1.0, 1.05] s.
  t0 = Clock::now();
  TokenBucket fast(10e6);
  left = 10000000;
  while (left > 0) {
    size_t chunk = std::min<size_t>(left, 64 * 1024);
    fast.consume(chunk);
    left -= chunk;
  }
  elapsed = seconds_since(t0);
  CHECK(elapsed >= 1.0);
  CHECK(elapsed <= 1.05);
}

TEST_CASE("token bucket forfeits idle credit beyond the burst cap") {
  TokenBucket bucket(1e6, 64 * 1024);
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  // 400 KB of credit accrued but only 64 KiB may remain: the next 128 KiB
  // still has to sleep off the uncovered half.
  Clock::time_point t0 = Clock::now();
  bucket.consume(64 * 1024);
  bucket.consume(64 * 1024);
  double elapsed = seconds_since(t0);
  CHECK(elapsed >= 0.05);
}

TEST_CASE("unlimited bucket is a no-op") {
  TokenBucket open = TokenBucket::unlimited();
  CHECK_FALSE(open.is_limited());
  Clock::time_point t0 = Clock::now();
  for (int i = 0; i < 1024; ++i) open.consume(1 << 20);
  CHECK(seconds_since(t0) < 0.1);
}

TEST_CASE("token bucket rejects a non-positive rate") {
  CHECK_THROWS_AS(TokenBucket(0.0), ConfigError);
  CHECK_THROWS_AS(TokenBucket(-5.0), ConfigError);
}

TEST_CASE("worker blobs are deterministic and bounded") {
  ParamBlob a = make_worker_blob(1, 3, 2, 4096);
  ParamBlob b = make_worker_blob(1, 3, 2, 4096);
  CHECK(a.values == b.values);
  CHECK(a.values.size() == 4096);
  CHECK_NOTHROW(a.validate());
  for (float v : a.values) {
    CHECK(v >= -1.0f);
    CHECK(v < 1.0f);
  }
  CHECK(make_worker_blob(1, 4, 2, 64).values != make_worker_blob(1, 3, 2, 64).values);
  CHECK(make_worker_blob(1, 3, 3, 64).values != make_worker_blob(1, 3, 2, 64).values);
  CHECK(make_worker_blob(2, 3, 2, 64).values != make_worker_blob(1, 3, 2, 64).values);
  CHECK_THROWS_AS(make_worker_blob(1, 0, 0, 0), ConfigError);
}

TEST_CASE("identity round trip: two workers, two rounds, exact aggregation") {
  ServerOptions so;
  so.workers = 2;
  so.rounds = 2;
  so.weight_bytes = 4096;
  so.timeout_s = 10.0;
  HarnessServer server(so);
  server.start();

  WorkerOptions base;
  base.port = server.port();
  base.rounds = 2;
  base.weight_bytes = 4096;
  base.timeout_s = 10.0;

  std::vector<WorkerReport> reports(2);
  WorkerErrors errors;
  std::vector<std::thread> threads;
  for (uint32_t id = 0; id < 2; ++id) {
    WorkerOptions wo = base;
    wo.worker_id = id;
    threads.emplace_back([wo, id, &reports, &errors] {
      errors.capture([&] { reports[id] = run_worker(wo); });
    });
  }
  HarnessReport report = server.run();
  for (std::thread& t : threads) t.join();
  CHECK(errors.joined() == "");

  CHECK(report.workers == 2);
  CHECK(report.rounds_completed == 2);
  CHECK(report.codec == "identity");
  REQUIRE(report.rounds.size() == 2);
  // identity aggregation re-encodes the exact float mean: zero error.
  CHECK(report.max_aggregate_err == 0.0);
  CHECK(report.aggregate_err_bound == 0.0);
  // PUSH frame: 9-byte frame header + 9-byte blob envelope + raw floats.
  CHECK(report.wire_bytes_per_push == 9 + 9 + 4096);
  CHECK(report.modeled_t_tnf_s == 0.0);  // unthrottled run
  for (const RoundStats& rs : report.rounds) {
    CHECK(rs.push_s > 0.0);
    CHECK(rs.broadcast_s > 0.0);
    CHECK(rs.end_to_end_s >= rs.push_s);
  }
  for (uint32_t id = 0; id < 2; ++id) {
    CHECK(reports[id].worker_id == id);
    REQUIRE(reports[id].rounds.size() == 2);
    CHECK(reports[id].rounds[1].round == 2);
    CHECK(reports[id].rounds[0].push_s > 0.0);
  }
}

TEST_CASE("single worker: the global blob is the worker's own push") {
  ServerOptions so;
  so.workers = 1;
  so.rounds = 1;
  so.weight_bytes = 1024;
  so.timeout_s = 10.0;
  HarnessServer server(so);
  server.start();

  WorkerOptions wo;
  wo.port = server.port();
  wo.weight_bytes = 1024;
  wo.timeout_s = 10.0;
  WorkerErrors errors;
  std::thread t([wo, &errors] { errors.capture([&] { run_worker(wo); }); });
  HarnessReport report = server.run();
  t.join();
  CHECK(errors.joined() == "");
  CHECK(report.rounds_completed == 1);
  CHECK(report.max_aggregate_err == 0.0);  // mean of one equals the input
}

TEST_CASE("quantized aggregation stays within its documented bound") {
  ServerOptions so;
  so.workers = 2;
  so.rounds = 1;
  so.codec = Codec::quant(8);
  so.weight_bytes = 64 * 1024;
  so.timeout_s = 10.0;
  HarnessServer server(so);
  server.start();

  WorkerErrors errors;
  std::vector<std::thread> threads;
  for (uint32_t id = 0; id < 2; ++id) {
    WorkerOptions wo;
    wo.port = server.port();
    wo.worker_id = id;
    wo.codec = Codec::quant(8);
    wo.weight_bytes = 64 * 1024;
    wo.timeout_s = 10.0;
    threads.emplace_back([wo, &errors] { errors.capture([&] { run_worker(wo); }); });
  }
  HarnessReport report = server.run();
  for (std::thread& t : threads) t.join();
  CHECK(errors.joined() == "");

  CHECK(report.rounds_completed == 1);
  CHECK(report.aggregate_err_bound > 0.0);
  CHECK(report.max_aggregate_err > 0.0);  // lossy, but
  CHECK(report.max_aggregate_err <= report.aggregate_err_bound);
  // quant8 pushes are roughly a quarter of the raw bytes.
  CHECK(report.wire_bytes_per_push < so.weight_bytes / 3);
}

TEST_CASE("four constant pushes aggregate to their exact mean") {
  ServerOptions so;
  so.workers = 4;
  so.rounds = 1;
  so.weight_bytes = 64;  // 16 floats
  so.timeout_s = 10.0;
  HarnessServer server(so);
  server.start();

  // Workers k = 1..4 push constant blobs of value k; the mean is exactly 2.5.
  WorkerErrors errors;
  std::atomic<int> exact_means{0};
  std::vector<std::thread> clients;
  for (uint32_t k = 1; k <= 4; ++k) {
    clients.emplace_back([k, port = server.port(), &errors, &exact_means] {
      errors.capture([&] {
        RawClient client(port);
        client.send_hello(k);
        ParamBlob blob{std::vector<float>(16, static_cast<float>(k))};
        Frame push;
        push.msg_type = MsgType::push;
        push.round = 1;
        push.payload = encode(Codec::identity(), blob).serialize();
        client.send_frame(push);
        Frame global = client.read_frame();
        if (global.msg_type != MsgType::global || global.round != 1)
          throw std::runtime_error("unexpected GLOBAL frame");
        ParamBlob mean =
            decode(Codec::identity(), EncodedBlob::deserialize(global.payload));
        for (float v : mean.values)
          if (v != 2.5f) throw std::runtime_error("mean is not 2.5");
        exact_means.fetch_add(1);
        Frame done;
        done.msg_type = MsgType::done;
        done.round = 2;
        client.send_frame(done);
        Frame ack = client.read_frame();
        if (ack.msg_type != MsgType::done) throw std::runtime_error("missing DONE ack");
      });
    });
  }
  HarnessReport report = server.run();
  for (std::thread& t : clients) t.join();
  CHECK(errors.joined() == "");
  CHECK(exact_means.load() == 4);
  CHECK(report.rounds_completed == 1);
  CHECK(report.max_aggregate_err == 0.0);
}

TEST_CASE("a vanished worker aborts the round with its name on the diagnostic") {
  ServerOptions so;
  so.workers = 1;
  so.rounds = 1;
  so.weight_bytes = 64;
  so.timeout_s = 5.0;
  HarnessServer server(so);
  server.start();

  std::thread client([port = server.port()] {
    try {
      RawClient c(port);
      c.send_hello(7);
      c.close();  // disappear instead of pushing
    } catch (...) {
    }
  });
  try {
    server.run();
    FAIL("expected NetError");
  } catch (const NetError& e) {
    std::string what = e.what();
    CHECK(what.find("worker 7") != std::string::npos);
  }
  client.join();
}

TEST_CASE("duplicate worker ids are rejected at the handshake") {
  ServerOptions so;
  so.workers = 2;
  so.rounds = 1;
  so.weight_bytes = 64;
  so.timeout_s = 5.0;
  HarnessServer server(so);
  server.start();

  std::thread a([port = server.port()] {
    try {
      RawClient c(port);
      c.send_hello(3);
      std::this_thread::sleep_for(std::chrono::milliseconds(500));
    } catch (...) {
    }
  });
  std::thread b([port = server.port()] {
    try {
      RawClient c(port);
      std::this_thread::sleep_for(std::chrono::milliseconds(100));  // after a's hello
      c.send_hello(3);
      std::this_thread::sleep_for(std::chrono::milliseconds(500));
    } catch (...) {
    }
  });
  try {
    server.run();
    FAIL("expected NetError");
  } catch (const NetError& e) {
    std::string what = e.what();
    CHECK(what.find("duplicate worker id 3") != std::string::npos);
  }
  a.join();
  b.join();
}

TEST_CASE("a push for the wrong round aborts with a diagnostic") {
  ServerOptions so;
  so.workers = 1;
  so.rounds = 1;
  so.weight_bytes = 64;
  so.timeout_s = 5.0;
  HarnessServer server(so);
  server.start();

  std::thread client([port = server.port()] {
    try {
      RawClient c(port);
      c.send_hello(0);
      Frame push;
      push.msg_type = MsgType::push;
      push.round = 5;  // server just opened round 1
      push.payload = encode(Codec::identity(), make_worker_blob(1, 0, 1, 16)).serialize();
      c.send_frame(push);
      std::this_thread::sleep_for(std::chrono::milliseconds(500));
    } catch (...) {
    }
  });
  try {
    server.run();
    FAIL("expected NetError");
  } catch (const NetError& e) {
    std::string what = e.what();
    CHECK(what.find("round 5") != std::string::npos);
    CHECK(what.find("worker 0") != std::string::npos);
  }
  client.join();
}

TEST_CASE("a silent worker times the round out") {
  ServerOptions so;
  so.workers = 1;
  so.rounds = 1;
  so.weight_bytes = 64;
  so.timeout_s = 0.5;
  HarnessServer server(so);
  server.start();

  std::thread client([port = server.port()] {
    try {
      RawClient c(port);
      c.send_hello(9);
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));  // never push
    } catch (...) {
    }
  });
  try {
    server.run();
    FAIL("expected NetError");
  } catch (const NetError& e) {
    std::string what = e.what();
    CHECK(what.find("timed out") != std::string::npos);
  }
  client.join();
}

TEST_CASE("workers retry the connect and then give up loudly") {
  WorkerOptions wo;
  wo.port = unused_port();  // nobody listens here
  wo.timeout_s = 2.0;
  Clock::time_point t0 = Clock::now();
  try {
    run_worker(wo);
    FAIL("expected NetError");
  } catch (const NetError& e) {
    std::string what = e.what();
    CHECK(what.find("attempts") != std::string::npos);
  }
  // Two backoff sleeps (200 ms, 400 ms) must have happened.
  CHECK(seconds_since(t0) >= 0.6);
}

TEST_CASE("option validation") {
  ServerOptions so;
  so.workers = 0;
  CHECK_THROWS_AS(HarnessServer{so}, ConfigError);
  so = ServerOptions{};
  so.weight_bytes = 2;
  CHECK_THROWS_AS(HarnessServer{so}, ConfigError);
  so = ServerOptions{};
  so.chi_bytes_per_s = -1.0;
  CHECK_THROWS_AS(HarnessServer{so}, ConfigError);

  WorkerOptions wo;
  wo.port = 0;
  CHECK_THROWS_AS(run_worker(wo), ConfigError);
  wo.port = 1;
  wo.compute_s = -0.5;
  CHECK_THROWS_AS(run_worker(wo), ConfigError);
}
