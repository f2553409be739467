#include "psim/frame.hpp"

#include <string>

namespace psim {

namespace {

void put_u32le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32le(const uint8_t* b) {
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

bool known_type(uint8_t t) {
  return t >= static_cast<uint8_t>(MsgType::hello) && t <= static_cast<uint8_t>(MsgType::done);
}

}  // namespace

const char* to_string(MsgType type) {
  switch (type) {
    case MsgType::hello: return "HELLO";
    case MsgType::push: return "PUSH";
    case MsgType::global: return "GLOBAL";
    case MsgType::done: return "DONE";
  }
  return "UNKNOWN";
}

std::vector<uint8_t> Frame::serialize() const {
  if (payload.size() > max_payload) throw NetError("frame payload exceeds the 1 GiB cap");
  std::vector<uint8_t> out;
  out.reserve(header_len + payload.size());
  out.push_back(static_cast<uint8_t>(msg_type));
  put_u32le(out, round);
  put_u32le(out, static_cast<uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

FrameHeader parse_frame_header(std::span<const uint8_t, Frame::header_len> header) {
  uint8_t t = header[0];
  if (!known_type(t)) throw NetError("unknown frame type " + std::to_string(t));
  FrameHeader h;
  h.msg_type = static_cast<MsgType>(t);
  h.round = get_u32le(header.data() + 1);
  h.payload_len = get_u32le(header.data() + 5);
  if (h.payload_len > Frame::max_payload)
    throw NetError("frame payload length " + std::to_string(h.payload_len) + " exceeds the cap");
  return h;
}

Frame parse_frame(std::span<const uint8_t> bytes) {
  if (bytes.size() < Frame::header_len)
    throw NetError("frame shorter than its 9-byte header: " + std::to_string(bytes.size()) +
                   " bytes");
  FrameHeader h = parse_frame_header(bytes.first<Frame::header_len>());
  if (bytes.size() - Frame::header_len != h.payload_len)
    throw NetError("frame length field " + std::to_string(h.payload_len) + " does not match " +
                   std::to_string(bytes.size() - Frame::header_len) + " payload bytes");
  Frame f;
  f.msg_type = h.msg_type;
  f.round = h.round;
  f.payload.assign(bytes.begin() + Frame::header_len, bytes.end());
  return f;
}

}  // namespace psim
