#include "streamix/info.hpp"

namespace streamix {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}
}  // namespace

void Info::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::optional<std::string> Info::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool Info::has(const std::string& key) const { return entries_.count(key) != 0; }

void Info::set_hex(const std::string& key, const void* bytes, size_t len) {
  entries_[key] = hex_encode(bytes, len);
}

Result<std::vector<uint8_t>> Info::get_hex(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return Err::not_found;
  return hex_decode(it->second);
}

std::string hex_encode(const void* bytes, size_t len) {
  const auto* p = static_cast<const uint8_t*>(bytes);
  std::string out;
  out.reserve(len * 2);
  for (size_t i = 0; i < len; ++i) {
    out.push_back(kHexDigits[p[i] >> 4]);
    out.push_back(kHexDigits[p[i] & 0x0f]);
  }
  return out;
}

Result<std::vector<uint8_t>> hex_decode(const std::string& s) {
  if (s.size() % 2 != 0) return Err::bad_encoding;
  std::vector<uint8_t> out;
  out.reserve(s.size() / 2);
  for (size_t i = 0; i < s.size(); i += 2) {
    int hi = nibble(s[i]);
    int lo = nibble(s[i + 1]);
    if (hi < 0 || lo < 0) return Err::bad_encoding;
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace streamix
