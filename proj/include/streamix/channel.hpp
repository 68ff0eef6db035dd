#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <vector>

#include "streamix/wire.hpp"

namespace streamix {

/// Reliable ordered loopback byte channel between one sending endpoint and
/// one receiving endpoint. Whole frames are appended under the channel lock,
/// so the buffer never holds a partial frame.
class Channel {
 public:
  void push(const Envelope& env, const void* payload) {
    std::lock_guard<std::mutex> lk(mu_);
    append_frame(buf_, env, payload);
    bytes_.store(buf_.size(), std::memory_order_relaxed);
    frames_pushed_.fetch_add(1, std::memory_order_relaxed);
  }

  /// Moves everything currently buffered into out (out should be empty; its
  /// capacity is recycled into the channel).
  void drain_into(std::vector<uint8_t>& out) {
    std::lock_guard<std::mutex> lk(mu_);
    buf_.swap(out);
    buf_.clear();
    bytes_.store(0, std::memory_order_relaxed);
  }

  bool maybe_nonempty() const {
    return bytes_.load(std::memory_order_relaxed) != 0;
  }

  uint64_t frames_pushed() const {
    return frames_pushed_.load(std::memory_order_relaxed);
  }

 private:
  mutable std::mutex mu_;
  std::vector<uint8_t> buf_;
  std::atomic<size_t> bytes_{0};
  std::atomic<uint64_t> frames_pushed_{0};
};

}  // namespace streamix
