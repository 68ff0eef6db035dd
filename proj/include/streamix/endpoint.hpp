#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include "streamix/channel.hpp"
#include "streamix/request.hpp"
#include "streamix/types.hpp"
#include "streamix/wire.hpp"

namespace streamix {

/// Receive-side matching pattern. Wildcards: ANY_SOURCE, ANY_TAG, ANY_INDEX
/// (src_idx only). dst_idx is always concrete (IDX_NONE outside multiplex
/// communicators) — the posting context is definite.
struct MatchPattern {
  uint32_t wire_context = 0;
  int source = ANY_SOURCE;
  int tag = ANY_TAG;
  int src_idx = IDX_NONE;
  int dst_idx = IDX_NONE;

  bool accepts(const Envelope& env) const {
    return wire_context == env.context_id &&
           (source == ANY_SOURCE || source == static_cast<int>(env.src_rank)) &&
           (tag == ANY_TAG || tag == env.tag) &&
           (src_idx == ANY_INDEX || src_idx == env.src_idx) &&
           dst_idx == env.dst_idx;
  }
};

struct RecvDesc {
  MatchPattern pattern;
  uint8_t* buf = nullptr;
  size_t capacity = 0;
  Req request;
};

struct UnexpectedMsg {
  Envelope env;
  std::vector<uint8_t> payload;
};

enum class MatchOutcome { matched, stored_unexpected };

/// An isolated communication context: posted-receive and unexpected-message
/// queues plus per-channel inbound traffic. Queue access requires the
/// endpoint's exclusion regime (or the owner's serial-context promise when
/// the regime is none); the Fabric enforces that via guards.
class Endpoint {
 public:
  Endpoint(int id, int pool_slot, PoolClass pool_class, Exclusion regime,
           int n_ranks, int total_endpoints)
      : id_(id),
        pool_slot_(pool_slot),
        pool_class_(pool_class),
        exclusion_(regime),
        default_exclusion_(regime),
        total_endpoints_(total_endpoints),
        inbound_(static_cast<size_t>(n_ranks) * total_endpoints) {}

  Endpoint(const Endpoint&) = delete;
  Endpoint& operator=(const Endpoint&) = delete;

  int id() const { return id_; }
  int pool_slot() const { return pool_slot_; }
  PoolClass pool_class() const { return pool_class_; }
  Exclusion exclusion() const { return exclusion_; }

  Channel& inbound(int src_rank, int src_endpoint) {
    return inbound_[static_cast<size_t>(src_rank) * total_endpoints_ +
                    src_endpoint];
  }
  std::vector<Channel>& inbound_channels() { return inbound_; }

  // --- matching engine (caller must hold this endpoint's exclusion) ---

  /// Arrival side: first posted receive whose pattern accepts the envelope
  /// wins; otherwise the message is stored in arrival order.
  MatchOutcome route_and_match(const Envelope& env, const uint8_t* payload);

  /// Post side: scans the unexpected queue in arrival order. Among stored
  /// messages with the same (context, source, src_idx) identity as the first
  /// match, the lowest sequence number is delivered, restoring issue order
  /// even if a transport reordered identities across channels.
  void post_receive(RecvDesc desc);

  size_t posted_count() const { return posted_.size(); }
  size_t unexpected_count() const { return unexpected_.size(); }
  uint64_t delivered_count() const { return delivered_; }

  std::vector<uint8_t>& scratch() { return scratch_; }
  std::mutex& mutex() { return mu_; }

  // Pool bookkeeping (guarded by the fabric's pool lock).
  bool exclusive_held = false;
  int shared_refs = 0;

  void set_exclusion(Exclusion e) { exclusion_ = e; }
  Exclusion default_exclusion() const { return default_exclusion_; }

#ifndef NDEBUG
  // Serial-context violation trap for the lock-free regime.
  std::atomic<std::thread::id> debug_owner{};
#endif

 private:
  void deliver(const Envelope& env, const uint8_t* payload,
               const RecvDesc& desc);

  int id_;
  int pool_slot_;
  PoolClass pool_class_;
  Exclusion exclusion_;
  Exclusion default_exclusion_;
  int total_endpoints_;

  std::deque<RecvDesc> posted_;
  std::deque<UnexpectedMsg> unexpected_;
  std::vector<Channel> inbound_;
  std::vector<uint8_t> scratch_;
  uint64_t delivered_ = 0;
  std::mutex mu_;
};

}  // namespace streamix
