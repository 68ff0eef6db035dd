#include "streamix/fabric.hpp"

#include <stdexcept>

namespace streamix {

Fabric::Fabric(int rank, int n_ranks, const FabricConfig& cfg)
    : rank_(rank), cfg_(cfg) {
  if (cfg.implicit_pool_size < 1)
    throw std::invalid_argument("implicit_pool_size must be >= 1");
  if (cfg.explicit_pool_size < 0)
    throw std::invalid_argument("explicit_pool_size must be >= 0");
  int total = cfg.implicit_pool_size + cfg.explicit_pool_size;
  if (total > MAX_POOL_SIZE)
    throw std::invalid_argument("endpoint pool exceeds MAX_POOL_SIZE");
  if (cfg.exclusion_mode == Exclusion::none)
    throw std::invalid_argument("pool exclusion mode must be global or per_endpoint");

  endpoints_.reserve(total);
  for (int i = 0; i < cfg.implicit_pool_size; ++i) {
    endpoints_.push_back(std::make_unique<Endpoint>(
        i, i, PoolClass::implicit, cfg.exclusion_mode, n_ranks, total));
  }
  for (int i = 0; i < cfg.explicit_pool_size; ++i) {
    endpoints_.push_back(std::make_unique<Endpoint>(
        cfg.implicit_pool_size + i, i, PoolClass::explicit_, cfg.exclusion_mode,
        n_ranks, total));
  }
}

Result<Endpoint*> Fabric::endpoint_acquire(PoolClass pool, AcquireMode mode) {
  std::lock_guard<std::mutex> lk(pool_mu_);
  int base = pool == PoolClass::implicit ? 0 : cfg_.implicit_pool_size;
  int count = pool == PoolClass::implicit ? cfg_.implicit_pool_size
                                          : cfg_.explicit_pool_size;
  if (pool == PoolClass::explicit_ && count == 0) return Err::no_explicit_pool;

  if (mode == AcquireMode::exclusive) {
    // Implicit endpoints stay in the hashing rotation and cannot be owned.
    if (pool == PoolClass::implicit) return Err::config_invalid;
    for (int s = 0; s < count; ++s) {
      Endpoint& ep = *endpoints_[base + s];
      if (!ep.exclusive_held && ep.shared_refs == 0) {
        ep.exclusive_held = true;
        // Sole ownership under a serial context: lock-free fast path.
        ep.set_exclusion(Exclusion::none);
        return &ep;
      }
    }
    return Err::pool_exhausted;
  }

  int& cursor = pool == PoolClass::implicit ? rr_implicit_ : rr_explicit_;
  int slot = acquire_round_robin(base, count, cursor);
  if (slot < 0) return Err::pool_exhausted;
  Endpoint& ep = *endpoints_[base + slot];
  ep.shared_refs += 1;
  return &ep;
}

int Fabric::acquire_round_robin(int base, int count, int& cursor) {
  // Skips exclusively held endpoints: they carry a no-lock serial-context
  // grant that a co-located shared user would break.
  for (int tries = 0; tries < count; ++tries) {
    int slot = cursor;
    cursor = (cursor + 1) % count;
    if (!endpoints_[base + slot]->exclusive_held) return slot;
  }
  return -1;
}

Result<void> Fabric::endpoint_release(Endpoint* ep) {
  std::lock_guard<std::mutex> lk(pool_mu_);
  if (ep->posted_count() > 0) return Err::pending_ops;
  if (ep->exclusive_held) {
    ep->exclusive_held = false;
    ep->set_exclusion(ep->default_exclusion());
  } else if (ep->shared_refs > 0) {
    ep->shared_refs -= 1;
  }
  return Result<void>::success();
}

int Fabric::select_implicit_endpoint(ImplicitPolicy policy, uint32_t context_id,
                                     Role role) {
  int pool = cfg_.implicit_pool_size;
  if (policy == ImplicitPolicy::one_to_one)
    return static_cast<int>(context_id % static_cast<uint32_t>(pool));
  if (role == Role::receiver) return 0;
  return rr_sender_.fetch_add(1, std::memory_order_relaxed) % pool;
}

int Fabric::progress_poll(Endpoint& ep) {
  EndpointGuard guard(global_mu_, ep);
  int n = 0;
  for (auto& ch : ep.inbound_channels()) {
    if (!ch.maybe_nonempty()) continue;
    auto& buf = ep.scratch();
    buf.clear();
    ch.drain_into(buf);
    size_t off = 0;
    Envelope env;
    const uint8_t* payload = nullptr;
    while (next_frame(buf, off, env, payload)) {
      ep.route_and_match(env, payload);
      ++n;
    }
  }
  return n;
}

int Fabric::progress_poll(const std::vector<Endpoint*>& eps) {
  int n = 0;
  for (Endpoint* ep : eps) n += progress_poll(*ep);
  return n;
}

}  // namespace streamix
