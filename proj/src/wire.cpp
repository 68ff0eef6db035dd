#include "streamix/wire.hpp"

namespace streamix {

namespace {

void put_u32(uint8_t* p, uint32_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
  p[2] = static_cast<uint8_t>(v >> 16);
  p[3] = static_cast<uint8_t>(v >> 24);
}

void put_u64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void encode_header(const Envelope& env, uint8_t out[kHeaderBytes]) {
  put_u32(out + 0, env.context_id);
  put_u32(out + 4, env.src_rank);
  put_u32(out + 8, static_cast<uint32_t>(env.src_idx));
  put_u32(out + 12, static_cast<uint32_t>(env.dst_idx));
  put_u32(out + 16, static_cast<uint32_t>(env.tag));
  put_u64(out + 20, env.seq);
  put_u64(out + 28, env.payload_len);
}

Envelope decode_header(const uint8_t in[kHeaderBytes]) {
  Envelope env;
  env.context_id = get_u32(in + 0);
  env.src_rank = get_u32(in + 4);
  env.src_idx = static_cast<int32_t>(get_u32(in + 8));
  env.dst_idx = static_cast<int32_t>(get_u32(in + 12));
  env.tag = static_cast<int32_t>(get_u32(in + 16));
  env.seq = get_u64(in + 20);
  env.payload_len = get_u64(in + 28);
  return env;
}

void append_frame(std::vector<uint8_t>& out, const Envelope& env,
                  const void* payload) {
  uint8_t hdr[kHeaderBytes];
  encode_header(env, hdr);
  out.insert(out.end(), hdr, hdr + kHeaderBytes);
  if (env.payload_len > 0) {
    const auto* p = static_cast<const uint8_t*>(payload);
    out.insert(out.end(), p, p + env.payload_len);
  }
}

bool next_frame(const std::vector<uint8_t>& buf, size_t& offset, Envelope& env,
                const uint8_t*& payload) {
  if (buf.size() - offset < kHeaderBytes) return false;
  Envelope e = decode_header(buf.data() + offset);
  if (buf.size() - offset < kHeaderBytes + e.payload_len) return false;
  env = e;
  payload = buf.data() + offset + kHeaderBytes;
  offset += kHeaderBytes + e.payload_len;
  return true;
}

}  // namespace streamix
