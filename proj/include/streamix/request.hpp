#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "streamix/types.hpp"

namespace streamix {

class ExecQueue;

struct Status {
  int source = ANY_SOURCE;      // world rank of the matched sender
  int tag = ANY_TAG;
  int source_index = IDX_NONE;  // matched sender stream index (multiplex)
  size_t bytes = 0;             // payload bytes delivered into the buffer
  bool truncated = false;       // sender payload exceeded the posted capacity
};

/// Handle for a pending operation. Fields other than the completion flag are
/// written by the runtime before completion is published and must not be
/// touched by callers.
struct Request {
  enum class Kind { send, recv };

  Kind kind = Kind::send;
  Status status;
  uint32_t ctx = 0;     // communicator context id
  int owner_rank = -1;  // logical process the request belongs to
  // Endpoint wait() drives progress on; enqueue-issued requests are bound to
  // theirs by the queue worker after the call returns.
  std::atomic<int> endpoint_id{-1};
  int stream_id = STREAM_NULL;
  ExecQueue* queue = nullptr;  // set for *_enqueue-issued requests
  std::atomic<int>* comm_pending = nullptr;

  bool complete() const { return complete_.load(std::memory_order_acquire); }

  void mark_complete() {
    if (comm_pending != nullptr)
      comm_pending->fetch_sub(1, std::memory_order_relaxed);
    complete_.store(true, std::memory_order_release);
  }

  bool consumed = false;  // wait() already returned this request's status

 private:
  std::atomic<bool> complete_{false};
};

using Req = std::shared_ptr<Request>;

}  // namespace streamix
