#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamix/result.hpp"

namespace streamix {

/// Key-value hint object. Values are ASCII strings; binary values go through
/// set_hex/get_hex (lowercase hex, two characters per byte, high nibble
/// first).
class Info {
 public:
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const;

  void set_hex(const std::string& key, const void* bytes, size_t len);
  Result<std::vector<uint8_t>> get_hex(const std::string& key) const;

  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::string> entries_;
};

std::string hex_encode(const void* bytes, size_t len);
Result<std::vector<uint8_t>> hex_decode(const std::string& s);

}  // namespace streamix
