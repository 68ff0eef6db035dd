#pragma once

#include <atomic>

#include "streamix/endpoint.hpp"
#include "streamix/types.hpp"

namespace streamix {

class ExecQueue;

/// A local serial execution context. serial_context streams bind an endpoint
/// (exclusive by default, shared via hint); exec_queue streams wrap an
/// execution queue and share endpoints round-robin.
struct Stream {
  enum class Kind { serial_context, exec_queue, null };

  int id = STREAM_NULL;
  Kind kind = Kind::null;
  Endpoint* endpoint = nullptr;
  bool exclusive = false;
  ExecQueue* queue = nullptr;
  std::atomic<int> refcount{0};  // communicators referencing this stream
};

}  // namespace streamix
