#include "psim/net_harness.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <memory>
#include <mutex>
#include <thread>

#include "psim/frame.hpp"
#include "psim/throttle.hpp"

namespace psim {

namespace {

using Clock = std::chrono::steady_clock;

constexpr size_t io_chunk = 64 * 1024;  // matches the throttle burst

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

Clock::time_point deadline_after(double seconds) {
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

std::string errno_text() { return std::strerror(errno); }

struct UniqueFd {
  int fd = -1;
  UniqueFd() = default;
  explicit UniqueFd(int f) : fd(f) {}
  UniqueFd(UniqueFd&& o) noexcept : fd(o.fd) { o.fd = -1; }
  UniqueFd& operator=(UniqueFd&& o) noexcept {
    if (this != &o) {
      reset();
      fd = o.fd;
      o.fd = -1;
    }
    return *this;
  }
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

sockaddr_in make_addr(const std::string& ip, uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, ip.c_str(), &addr.sin_addr) != 1)
    throw ConfigError("'" + ip + "' is not a numeric IPv4 address");
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void write_all(int fd, std::span<const uint8_t> bytes) {
  size_t sent = 0;
  while (sent < bytes.size()) {
    ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw NetError("send failed: " + errno_text());
    }
    sent += static_cast<size_t>(n);
  }
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return static_cast<int>(std::max<int64_t>(left.count(), 0));
}

void read_exact(int fd, uint8_t* dst, size_t n, Clock::time_point deadline,
                TokenBucket* bucket) {
  size_t got = 0;
  while (got < n) {
    int ms = remaining_ms(deadline);
    if (ms <= 0) throw NetError("timed out waiting for data");
    pollfd p{fd, POLLIN, 0};
    int pr = ::poll(&p, 1, ms);
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw NetError("poll failed: " + errno_text());
    }
    if (pr == 0) continue;  // loop re-checks the deadline
    ssize_t r = ::recv(fd, dst + got, std::min(n - got, io_chunk), 0);
    if (r == 0) throw NetError("connection closed by peer");
    if (r < 0) {
      if (errno == EINTR) continue;
      throw NetError("recv failed: " + errno_text());
    }
    if (bucket) bucket->consume(static_cast<size_t>(r));
    got += static_cast<size_t>(r);
  }
}

Frame read_frame(int fd, Clock::time_point deadline, TokenBucket* bucket) {
  uint8_t header[Frame::header_len];
  read_exact(fd, header, sizeof(header), deadline, bucket);
  FrameHeader h = parse_frame_header(std::span<const uint8_t, Frame::header_len>(header));
  Frame f;
  f.msg_type = h.msg_type;
  f.round = h.round;
  f.payload.resize(h.payload_len);
  if (h.payload_len > 0) read_exact(fd, f.payload.data(), h.payload_len, deadline, bucket);
  return f;
}

void send_frame(int fd, const Frame& frame) { write_all(fd, frame.serialize()); }

// ---- aggregation -----------------------------------------------------------

std::vector<float> decode_deposit(const Codec& codec, const std::vector<uint8_t>& deposit,
                                  uint32_t expected_count) {
  EncodedBlob enc = EncodedBlob::deserialize(deposit);
  if (enc.codec_id != codec.id)
    throw NetError(std::string("pushed blob does not use the configured codec ") + codec.name());
  if (enc.original_count != expected_count)
    throw NetError("pushed blob holds " + std::to_string(enc.original_count) +
                   " values, expected " + std::to_string(expected_count));
  return decode(codec, enc).values;
}

std::vector<uint8_t> aggregate_deposits(const Codec& codec,
                                        const std::vector<std::vector<uint8_t>>& deposits,
                                        uint32_t expected_count) {
  EncodedBlob out;
  out.codec_id = codec.id;
  out.original_count = expected_count;
  if (codec.id == CodecId::quant) {
    std::vector<QuantizedBlob> qs;
    qs.reserve(deposits.size());
    for (const auto& d : deposits) {
      EncodedBlob enc = EncodedBlob::deserialize(d);
      if (enc.codec_id != codec.id)
        throw NetError("pushed blob does not use the configured quant codec");
      if (enc.original_count != expected_count)
        throw NetError("pushed blob holds " + std::to_string(enc.original_count) +
                       " values, expected " + std::to_string(expected_count));
      qs.push_back(QuantizedBlob::unpack_payload(enc.payload, enc.original_count));
    }
    out.payload = h_average(qs).pack_payload();
    return out.serialize();
  }
  std::vector<double> acc(expected_count, 0.0);
  for (const auto& d : deposits) {
    std::vector<float> vals = decode_deposit(codec, d, expected_count);
    for (size_t e = 0; e < acc.size(); ++e) acc[e] += static_cast<double>(vals[e]);
  }
  ParamBlob mean;
  mean.values.resize(expected_count);
  for (size_t e = 0; e < acc.size(); ++e)
    mean.values[e] = static_cast<float>(acc[e] / static_cast<double>(deposits.size()));
  out = encode(codec, mean);
  return out.serialize();
}

struct AggregateCheck {
  double abs_err = 0.0;
  double bound = 0.0;
};

// Float-domain oracle: the global blob must match the mean of the (decoded)
// pushes within the codec's documented bound — exactly, for lossless codecs.
AggregateCheck check_aggregate(const Codec& codec,
                               const std::vector<std::vector<uint8_t>>& deposits,
                               const std::vector<uint8_t>& global_bytes,
                               uint32_t expected_count) {
  EncodedBlob genc = EncodedBlob::deserialize(global_bytes);
  ParamBlob global = decode(codec, genc);
  std::vector<double> acc(expected_count, 0.0);
  for (const auto& d : deposits) {
    std::vector<float> vals = decode_deposit(codec, d, expected_count);
    for (size_t e = 0; e < acc.size(); ++e) acc[e] += static_cast<double>(vals[e]);
  }
  double m = static_cast<double>(deposits.size());
  AggregateCheck check;
  double max_abs_mean = 0.0;
  for (size_t e = 0; e < acc.size(); ++e) {
    double mean = acc[e] / m;
    max_abs_mean = std::max(max_abs_mean, std::abs(mean));
    check.abs_err = std::max(check.abs_err,
                             std::abs(static_cast<double>(global.values[e]) - mean));
  }
  if (codec.id == CodecId::quant) {
    QuantizedBlob gq = QuantizedBlob::unpack_payload(genc.payload, genc.original_count);
    check.bound = h_average_error_bound(gq, deposits.size(), max_abs_mean);
  }
  return check;
}

// ---- shared server state ----------------------------------------------------

struct ServerState {
  std::mutex mu;
  std::condition_variable cv;
  uint32_t open_round = 0;    // round whose PUSH frames may be read
  uint32_t global_round = 0;  // round whose GLOBAL frame is ready to send
  bool done_phase = false;
  bool aborted = false;
  std::string abort_reason;
  uint32_t deposited = 0;
  uint32_t sent = 0;
  std::vector<std::vector<uint8_t>> deposits;  // by rank (ascending worker id)
  std::vector<bool> have;
  std::vector<uint8_t> global_frame;
  Clock::time_point push_end{};
  Clock::time_point bcast_end{};

  void abort(const std::string& reason) {
    std::lock_guard<std::mutex> g(mu);
    if (!aborted) {
      aborted = true;
      abort_reason = reason;
    }
    cv.notify_all();
  }
};

}  // namespace

ParamBlob make_worker_blob(uint64_t seed, uint32_t worker_id, uint32_t round, size_t count) {
  if (count == 0) throw ConfigError("worker blob needs at least one value");
  uint64_t state = seed;
  state ^= (static_cast<uint64_t>(worker_id) + 1) * 0x9E3779B97F4A7C15ULL;
  state ^= (static_cast<uint64_t>(round) + 1) * 0xC2B2AE3D27D4EB4FULL;
  std::vector<float> values(count);
  for (size_t i = 0; i < count; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    // top 24 bits -> [0, 2) -> [-1, 1)
    values[i] = static_cast<float>(static_cast<double>(z >> 40) * (1.0 / 8388608.0) - 1.0);
  }
  return ParamBlob{std::move(values)};
}

void ServerOptions::validate() const {
  if (workers < 1) throw ConfigError("server needs at least one worker");
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (weight_bytes < 4) throw ConfigError("weight_bytes must be at least 4");
  if (chi_bytes_per_s < 0.0) throw ConfigError("chi_bytes_per_s must be non-negative");
  if (timeout_s <= 0.0) throw ConfigError("timeout_s must be positive");
}

void WorkerOptions::validate() const {
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (weight_bytes < 4) throw ConfigError("weight_bytes must be at least 4");
  if (compute_s < 0.0) throw ConfigError("compute_s must be non-negative");
  if (timeout_s <= 0.0) throw ConfigError("timeout_s must be positive");
  if (connect_retries < 1) throw ConfigError("connect_retries must be at least 1");
  if (port == 0) throw ConfigError("worker needs the server port");
}

HarnessServer::HarnessServer(ServerOptions options) : options_(std::move(options)) {
  options_.validate();
}

HarnessServer::~HarnessServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void HarnessServer::start() {
  if (listen_fd_ >= 0) return;
  sockaddr_in addr = make_addr(options_.bind_addr, options_.port);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw NetError("socket failed: " + errno_text());
  UniqueFd guard(fd);
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw NetError("bind to " + options_.bind_addr + ":" + std::to_string(options_.port) +
                   " failed: " + errno_text());
  if (::listen(fd, static_cast<int>(options_.workers) + 8) != 0)
    throw NetError("listen failed: " + errno_text());
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
    throw NetError("getsockname failed: " + errno_text());
  port_ = ntohs(addr.sin_port);
  listen_fd_ = fd;
  guard.fd = -1;
}

uint16_t HarnessServer::port() const {
  if (listen_fd_ < 0) throw NetError("server not started");
  return port_;
}

HarnessReport HarnessServer::run() {
  start();
  const uint32_t m = options_.workers;
  const uint32_t rounds = options_.rounds;
  const uint32_t expected_count = static_cast<uint32_t>(options_.weight_bytes / 4);

  // ---- accept phase ----
  struct Conn {
    UniqueFd fd;
    uint32_t worker_id = 0;
  };
  std::vector<Conn> conns;
  conns.reserve(m);
  for (uint32_t j = 0; j < m; ++j) {
    auto deadline = deadline_after(options_.timeout_s);
    pollfd p{listen_fd_, POLLIN, 0};
    int pr = ::poll(&p, 1, remaining_ms(deadline));
    if (pr <= 0)
      throw NetError("timed out waiting for worker connections (" + std::to_string(j) + " of " +
                     std::to_string(m) + " connected)");
    int cfd = ::accept(listen_fd_, nullptr, nullptr);
    if (cfd < 0) throw NetError("accept failed: " + errno_text());
    Conn conn;
    conn.fd = UniqueFd(cfd);
    set_nodelay(cfd);
    Frame hello = read_frame(cfd, deadline_after(options_.timeout_s), nullptr);
    if (hello.msg_type != MsgType::hello || hello.round != 0 || hello.payload.size() != 4)
      throw NetError("malformed HELLO from a connecting worker");
    conn.worker_id = static_cast<uint32_t>(hello.payload[0]) |
                     (static_cast<uint32_t>(hello.payload[1]) << 8) |
                     (static_cast<uint32_t>(hello.payload[2]) << 16) |
                     (static_cast<uint32_t>(hello.payload[3]) << 24);
    for (const Conn& c : conns)
      if (c.worker_id == conn.worker_id)
        throw NetError("duplicate worker id " + std::to_string(conn.worker_id));
    conns.push_back(std::move(conn));
  }
  std::sort(conns.begin(), conns.end(),
            [](const Conn& a, const Conn& b) { return a.worker_id < b.worker_id; });

  // Ingress pacing: one bucket shared by every connection matches the cost
  // model's single cluster rate chi; per-link mode gives each its own.
  std::vector<std::unique_ptr<TokenBucket>> buckets;
  if (options_.chi_bytes_per_s > 0.0) {
    size_t n = options_.per_link_throttle ? m : 1;
    for (size_t i = 0; i < n; ++i)
      buckets.push_back(std::make_unique<TokenBucket>(options_.chi_bytes_per_s));
  }
  auto bucket_for = [&](uint32_t rank) -> TokenBucket* {
    if (buckets.empty()) return nullptr;
    return options_.per_link_throttle ? buckets[rank].get() : buckets[0].get();
  };

  ServerState st;
  st.deposits.resize(m);
  st.have.assign(m, false);
  const double timeout_s = options_.timeout_s;

  auto conn_main = [&](uint32_t rank) {
    int fd = conns[rank].fd.fd;
    std::string label = "worker " + std::to_string(conns[rank].worker_id);
    TokenBucket* bucket = bucket_for(rank);
    try {
      for (uint32_t k = 1; k <= rounds; ++k) {
        {
          std::unique_lock<std::mutex> lk(st.mu);
          st.cv.wait(lk, [&] { return st.aborted || st.open_round >= k; });
          if (st.aborted) return;
        }
        Frame f = read_frame(fd, deadline_after(timeout_s), bucket);
        if (f.msg_type != MsgType::push)
          throw NetError(std::string("expected PUSH, got ") + to_string(f.msg_type));
        if (f.round != k)
          throw NetError("PUSH carries round " + std::to_string(f.round) + ", expected " +
                         std::to_string(k));
        {
          std::lock_guard<std::mutex> g(st.mu);
          st.deposits[rank] = std::move(f.payload);
          st.have[rank] = true;
          if (++st.deposited == m) st.push_end = Clock::now();
          st.cv.notify_all();
        }
        {
          std::unique_lock<std::mutex> lk(st.mu);
          st.cv.wait(lk, [&] { return st.aborted || st.global_round >= k; });
          if (st.aborted) return;
        }
        write_all(fd, st.global_frame);  // read-only until the next round opens
        {
          std::lock_guard<std::mutex> g(st.mu);
          if (++st.sent == m) st.bcast_end = Clock::now();
          st.cv.notify_all();
        }
      }
      {
        std::unique_lock<std::mutex> lk(st.mu);
        st.cv.wait(lk, [&] { return st.aborted || st.done_phase; });
        if (st.aborted) return;
      }
      Frame f = read_frame(fd, deadline_after(timeout_s), nullptr);
      if (f.msg_type != MsgType::done || f.round != rounds + 1)
        throw NetError("expected the closing DONE frame");
      Frame reply;
      reply.msg_type = MsgType::done;
      reply.round = rounds + 1;
      send_frame(fd, reply);
    } catch (const std::exception& e) {
      st.abort(label + ": " + e.what());
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(m);
  for (uint32_t r = 0; r < m; ++r) threads.emplace_back(conn_main, r);

  auto shutdown_all = [&] {
    for (Conn& c : conns)
      if (c.fd.fd >= 0) ::shutdown(c.fd.fd, SHUT_RDWR);
  };
  auto join_all = [&] {
    for (std::thread& t : threads)
      if (t.joinable()) t.join();
  };

  HarnessReport report;
  report.workers = m;
  report.codec = options_.codec.name();
  report.weight_bytes = options_.weight_bytes;
  report.chi_bytes_per_s = options_.chi_bytes_per_s;

  try {
    for (uint32_t k = 1; k <= rounds; ++k) {
      Clock::time_point t0;
      {
        std::lock_guard<std::mutex> g(st.mu);
        st.deposited = 0;
        st.sent = 0;
        std::fill(st.have.begin(), st.have.end(), false);
        st.open_round = k;
        t0 = Clock::now();
        st.cv.notify_all();
      }
      {
        std::unique_lock<std::mutex> lk(st.mu);
        bool ok = st.cv.wait_until(lk, deadline_after(timeout_s),
                                   [&] { return st.aborted || st.deposited == m; });
        if (st.aborted) throw NetError(st.abort_reason);
        if (!ok) {
          std::string missing;
          for (uint32_t r = 0; r < m; ++r)
            if (!st.have[r]) missing += (missing.empty() ? "" : ", ") +
                                        std::to_string(conns[r].worker_id);
          throw NetError("round " + std::to_string(k) + " timed out waiting for PUSH from worker" +
                         (missing.find(',') != std::string::npos ? "s " : " ") + missing);
        }
      }
      RoundStats rs;
      rs.round = k;
      rs.push_s = seconds_between(t0, st.push_end);
      if (k == 1 && !st.deposits.empty())
        report.wire_bytes_per_push = Frame::header_len + st.deposits[0].size();

      Clock::time_point t1 = Clock::now();
      std::vector<uint8_t> global_bytes =
          aggregate_deposits(options_.codec, st.deposits, expected_count);
      Frame gframe;
      gframe.msg_type = MsgType::global;
      gframe.round = k;
      gframe.payload = global_bytes;
      std::vector<uint8_t> gwire = gframe.serialize();
      Clock::time_point t2 = Clock::now();
      rs.aggregate_s = seconds_between(t1, t2);

      Clock::time_point t3;
      {
        std::lock_guard<std::mutex> g(st.mu);
        st.global_frame = std::move(gwire);
        st.global_round = k;
        t3 = Clock::now();
        st.cv.notify_all();
      }
      {
        std::unique_lock<std::mutex> lk(st.mu);
        bool ok = st.cv.wait_until(lk, deadline_after(timeout_s),
                                   [&] { return st.aborted || st.sent == m; });
        if (st.aborted) throw NetError(st.abort_reason);
        if (!ok) throw NetError("round " + std::to_string(k) + " timed out broadcasting GLOBAL");
      }
      rs.broadcast_s = seconds_between(t3, st.bcast_end);
      rs.end_to_end_s = seconds_between(t0, st.bcast_end);

      // Oracle validation, deliberately outside every timed section.
      AggregateCheck check =
          check_aggregate(options_.codec, st.deposits, global_bytes, expected_count);
      rs.aggregate_abs_err = check.abs_err;
      rs.aggregate_err_bound = check.bound;
      report.rounds.push_back(rs);
    }
    {
      std::lock_guard<std::mutex> g(st.mu);
      st.done_phase = true;
      st.cv.notify_all();
    }
    join_all();
    if (st.aborted) throw NetError(st.abort_reason);
  } catch (...) {
    st.abort("server shutting down");
    shutdown_all();
    join_all();
    throw;
  }

  report.rounds_completed = static_cast<uint32_t>(report.rounds.size());
  double transfer_sum = 0.0;
  for (const RoundStats& rs : report.rounds) {
    transfer_sum += rs.push_s + rs.broadcast_s;
    report.max_aggregate_err = std::max(report.max_aggregate_err, rs.aggregate_abs_err);
    report.aggregate_err_bound = std::max(report.aggregate_err_bound, rs.aggregate_err_bound);
  }
  report.measured_transfer_s = transfer_sum / static_cast<double>(report.rounds.size());
  if (options_.chi_bytes_per_s > 0.0) {
    report.modeled_t_tnf_s = static_cast<double>(report.wire_bytes_per_push) *
                             static_cast<double>(m) / options_.chi_bytes_per_s;
    report.relative_error =
        std::abs(report.measured_transfer_s - report.modeled_t_tnf_s) / report.modeled_t_tnf_s;
  }
  return report;
}

HarnessReport run_server(const ServerOptions& options) {
  HarnessServer server(options);
  server.start();
  return server.run();
}

WorkerReport run_worker(const WorkerOptions& options) {
  options.validate();
  sockaddr_in addr = make_addr(options.connect_addr, options.port);

  UniqueFd fd;
  std::string last_error;
  for (int attempt = 0; attempt < options.connect_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
    int s = ::socket(AF_INET, SOCK_STREAM, 0);
    if (s < 0) throw NetError("socket failed: " + errno_text());
    if (::connect(s, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
      fd = UniqueFd(s);
      break;
    }
    last_error = errno_text();
    ::close(s);
  }
  if (fd.fd < 0)
    throw NetError("could not connect to " + options.connect_addr + ":" +
                   std::to_string(options.port) + " after " +
                   std::to_string(options.connect_retries) + " attempts: " + last_error);
  set_nodelay(fd.fd);

  Frame hello;
  hello.msg_type = MsgType::hello;
  hello.round = 0;
  hello.payload = {static_cast<uint8_t>(options.worker_id),
                   static_cast<uint8_t>(options.worker_id >> 8),
                   static_cast<uint8_t>(options.worker_id >> 16),
                   static_cast<uint8_t>(options.worker_id >> 24)};
  send_frame(fd.fd, hello);

  size_t count = static_cast<size_t>(options.weight_bytes / 4);
  WorkerReport report;
  report.worker_id = options.worker_id;
  report.rounds.reserve(options.rounds);

  for (uint32_t k = 1; k <= options.rounds; ++k) {
    WorkerRoundStats ws;
    ws.round = k;
    Clock::time_point t0 = Clock::now();
    if (options.compute_s > 0.0)
      std::this_thread::sleep_for(std::chrono::duration<double>(options.compute_s));
    Clock::time_point t1 = Clock::now();
    ws.compute_s = seconds_between(t0, t1);

    ParamBlob blob = make_worker_blob(options.seed, options.worker_id, k, count);
    EncodedBlob enc = encode(options.codec, blob);
    Clock::time_point t2 = Clock::now();
    ws.encode_s = seconds_between(t1, t2);

    Frame push;
    push.msg_type = MsgType::push;
    push.round = k;
    push.payload = enc.serialize();
    write_all(fd.fd, push.serialize());
    Clock::time_point t3 = Clock::now();
    ws.push_s = seconds_between(t2, t3);

    Frame global = read_frame(fd.fd, deadline_after(options.timeout_s), nullptr);
    Clock::time_point t4 = Clock::now();
    ws.wait_s = seconds_between(t3, t4);
    if (global.msg_type != MsgType::global)
      throw NetError(std::string("expected GLOBAL, got ") + to_string(global.msg_type));
    if (global.round != k)
      throw NetError("GLOBAL carries round " + std::to_string(global.round) + ", expected " +
                     std::to_string(k));
    ParamBlob decoded = decode(options.codec, EncodedBlob::deserialize(global.payload));
    if (decoded.values.size() != count)
      throw NetError("GLOBAL blob holds " + std::to_string(decoded.values.size()) +
                     " values, expected " + std::to_string(count));
    ws.decode_s = seconds_between(t4, Clock::now());
    report.rounds.push_back(ws);
  }

  Frame done;
  done.msg_type = MsgType::done;
  done.round = options.rounds + 1;
  send_frame(fd.fd, done);
  Frame reply = read_frame(fd.fd, deadline_after(options.timeout_s), nullptr);
  if (reply.msg_type != MsgType::done)
    throw NetError("server did not acknowledge DONE");
  return report;
}

}  // namespace psim
