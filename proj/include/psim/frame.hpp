#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psim/types.hpp"

namespace psim {

enum class MsgType : uint8_t {
  hello = 0x01,   // payload: [u32 LE worker_id]
  push = 0x02,    // payload: serialized EncodedBlob
  global = 0x03,  // payload: serialized EncodedBlob
  done = 0x04,    // payload: empty
};

const char* to_string(MsgType type);

// Wire frame: [u8 msg_type][u32 LE round][u32 LE payload_len][payload].
struct Frame {
  static constexpr size_t header_len = 9;
  // Refuse to allocate for absurd length fields (fuzzed or corrupt headers).
  static constexpr uint32_t max_payload = 1u << 30;

  MsgType msg_type = MsgType::hello;
  uint32_t round = 0;
  std::vector<uint8_t> payload;

  std::vector<uint8_t> serialize() const;
};

// Parses one complete frame; the buffer must contain exactly one frame.
// Throws NetError on unknown type, length mismatch, or oversized payload.
Frame parse_frame(std::span<const uint8_t> bytes);

// Header-only parse used by socket readers to learn the payload length
// before the payload arrives.
struct FrameHeader {
  MsgType msg_type;
  uint32_t round;
  uint32_t payload_len;
};
FrameHeader parse_frame_header(std::span<const uint8_t, Frame::header_len> header);

}  // namespace psim
