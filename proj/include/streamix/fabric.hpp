#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <vector>

#include "streamix/endpoint.hpp"
#include "streamix/result.hpp"
#include "streamix/types.hpp"

namespace streamix {

/// Scoped entry into an endpoint's matching engine under its exclusion
/// regime: the process-wide lock, the endpoint's own lock, or nothing when
/// the owner's serial context stands in for synchronization.
class EndpointGuard {
 public:
  EndpointGuard(std::mutex& global_mu, Endpoint& ep) : ep_(&ep) {
    switch (ep.exclusion()) {
      case Exclusion::global:
        lock_ = &global_mu;
        break;
      case Exclusion::per_endpoint:
        lock_ = &ep.mutex();
        break;
      case Exclusion::none:
        lock_ = nullptr;
        break;
    }
    if (lock_ != nullptr) lock_->lock();
#ifndef NDEBUG
    if (lock_ == nullptr) {
      auto me = std::this_thread::get_id();
      auto prev = ep_->debug_owner.exchange(me, std::memory_order_acq_rel);
      assert((prev == std::thread::id{} || prev == me) &&
             "concurrent entry into a lock-free endpoint: serial-context "
             "contract violated");
      trap_armed_ = true;
    }
#endif
  }

  ~EndpointGuard() {
#ifndef NDEBUG
    if (trap_armed_)
      ep_->debug_owner.store(std::thread::id{}, std::memory_order_release);
#endif
    if (lock_ != nullptr) lock_->unlock();
  }

  EndpointGuard(const EndpointGuard&) = delete;
  EndpointGuard& operator=(const EndpointGuard&) = delete;

 private:
  Endpoint* ep_;
  std::mutex* lock_ = nullptr;
#ifndef NDEBUG
  bool trap_armed_ = false;
#endif
};

/// Per-process endpoint pool and progress engine. Endpoint ids are global
/// across both pools: implicit slots occupy [0, implicit_pool_size), explicit
/// slots follow. pool_slot() gives the position within the endpoint's own
/// pool.
class Fabric {
 public:
  Fabric(int rank, int n_ranks, const FabricConfig& cfg);

  int rank() const { return rank_; }
  const FabricConfig& config() const { return cfg_; }
  int total_endpoints() const { return static_cast<int>(endpoints_.size()); }
  Endpoint& endpoint(int id) { return *endpoints_[id]; }

  Result<Endpoint*> endpoint_acquire(PoolClass pool, AcquireMode mode);
  Result<void> endpoint_release(Endpoint* ep);

  /// Deterministic endpoint choice for traffic without an explicit stream.
  /// one_to_one hashes the context id identically for both roles;
  /// sender_any_recv_default rotates senders and pins receivers to endpoint 0.
  int select_implicit_endpoint(ImplicitPolicy policy, uint32_t context_id,
                               Role role);

  /// Drains all currently available inbound traffic for one endpoint through
  /// the matching engine. Nonblocking; returns the number of messages
  /// processed.
  int progress_poll(Endpoint& ep);
  int progress_poll(const std::vector<Endpoint*>& eps);

  std::mutex& global_mutex() { return global_mu_; }

 private:
  int acquire_round_robin(int base, int count, int& cursor);

  int rank_;
  FabricConfig cfg_;
  std::vector<std::unique_ptr<Endpoint>> endpoints_;
  std::mutex global_mu_;  // Exclusion::global critical section
  std::mutex pool_mu_;    // acquire/release bookkeeping
  int rr_explicit_ = 0;
  int rr_implicit_ = 0;
  std::atomic<int> rr_sender_{0};
};

}  // namespace streamix
