#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

namespace streamix {

/// Wire-level message header. Serialized little-endian in field order:
///   context_id:u32, src_rank:u32, src_idx:i32, dst_idx:i32, tag:i32,
///   seq:u64, payload_len:u64
/// followed by payload bytes.
struct Envelope {
  uint32_t context_id = 0;  // (comm ctx << 1) | collective bit
  uint32_t src_rank = 0;
  int32_t src_idx = 0;
  int32_t dst_idx = 0;
  int32_t tag = 0;
  uint64_t seq = 0;
  uint64_t payload_len = 0;
};

constexpr size_t kHeaderBytes = 36;

void encode_header(const Envelope& env, uint8_t out[kHeaderBytes]);
Envelope decode_header(const uint8_t in[kHeaderBytes]);

/// Appends one framed message (header + payload) to out.
void append_frame(std::vector<uint8_t>& out, const Envelope& env,
                  const void* payload);

/// Parses the frame starting at offset; advances offset past it. Returns
/// false when fewer than a whole frame remains (offset untouched). payload
/// points into buf.
bool next_frame(const std::vector<uint8_t>& buf, size_t& offset, Envelope& env,
                const uint8_t*& payload);

// Communicator context ids are multiplexed onto the wire context field:
// user point-to-point traffic on ctx<<1, internal collective rendezvous on
// ctx<<1|1, so user wildcards can never match rendezvous messages.
constexpr uint32_t wire_ctx(uint32_t comm_ctx, bool collective) {
  return (comm_ctx << 1) | (collective ? 1u : 0u);
}

}  // namespace streamix
