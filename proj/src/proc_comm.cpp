#include <cassert>
#include <cstring>

#include "streamix/world.hpp"

namespace streamix {

namespace {
// Rendezvous phases, matched by concrete tags on the collective wire context.
constexpr int TAG_CTX = 1;
constexpr int TAG_SIZE = 2;
constexpr int TAG_DATA = 3;
constexpr int TAG_BARRIER_IN = 4;
constexpr int TAG_BARRIER_OUT = 5;
}  // namespace

void Proc::ctrl_send(CommState& c, int dest, int tag, const void* buf,
                     size_t len) {
  Req r = post_send(c, buf, len, dest, tag, 0, IDX_NONE, IDX_NONE, true);
  r->consumed = true;  // eager send, nothing to wait for
}

size_t Proc::ctrl_recv(CommState& c, int source, int tag, void* buf,
                       size_t cap) {
  Req r = post_recv(c, buf, cap, source, tag, IDX_NONE, 0, IDX_NONE, true);
  auto st = wait(r);
  assert(st.ok() && !st->truncated);
  return st->bytes;
}

Result<void> Proc::barrier(CommH comm) {
  if (!comm.valid()) return Err::invalid_comm;
  CommState& c = *comm.p;
  if (c.n_ranks == 1) return Result<void>::success();
  constexpr int root = 0;
  if (rank_ == root) {
    for (int r = 1; r < c.n_ranks; ++r)
      ctrl_recv(c, r, TAG_BARRIER_IN, nullptr, 0);
    for (int r = 1; r < c.n_ranks; ++r)
      ctrl_send(c, r, TAG_BARRIER_OUT, nullptr, 0);
  } else {
    ctrl_send(c, root, TAG_BARRIER_IN, nullptr, 0);
    ctrl_recv(c, root, TAG_BARRIER_OUT, nullptr, 0);
  }
  return Result<void>::success();
}

Result<CommH> Proc::stream_comm_create(CommH parent, int stream_id) {
  if (!parent.valid()) return Err::invalid_comm;
  return create_comm(parent, {stream_id}, false);
}

Result<CommH> Proc::stream_comm_create_multiple(
    CommH parent, const std::vector<int>& stream_ids) {
  if (!parent.valid()) return Err::invalid_comm;
  if (stream_ids.empty()) return Err::empty_list;
  return create_comm(parent, stream_ids, true);
}

Result<CommH> Proc::create_comm(CommH parent, const std::vector<int>& stream_ids,
                                bool multiplex) {
  CommState& par = *parent.p;
  const FabricConfig& cfg = fabric_.config();

  // Validate locally before touching the wire; a member that fails here must
  // not leave peers stranded mid-exchange.
  std::vector<Stream*> streams;
  streams.reserve(stream_ids.size());
  for (int id : stream_ids) {
    if (id == STREAM_NULL) {
      streams.push_back(nullptr);
      continue;
    }
    Stream* s = stream_get(id);
    if (s == nullptr) return Err::invalid_stream;
    streams.push_back(s);
  }

  // Phase 1: the root allocates the context id and distributes it. Whatever
  // stream is attached to the parent plays no part beyond carrying this
  // rendezvous traffic.
  constexpr int root = 0;
  uint32_t new_ctx = 0;
  if (rank_ == root) {
    new_ctx = world_->alloc_ctx();
    for (int r = 0; r < par.n_ranks; ++r)
      if (r != root) ctrl_send(par, r, TAG_CTX, &new_ctx, sizeof(new_ctx));
  } else {
    ctrl_recv(par, root, TAG_CTX, &new_ctx, sizeof(new_ctx));
  }

  // Receive endpoint per local index; STREAM_NULL slots use the implicit
  // policy with the new context id.
  std::vector<uint32_t> my_eps(streams.size());
  for (size_t i = 0; i < streams.size(); ++i) {
    my_eps[i] = streams[i] != nullptr
                    ? static_cast<uint32_t>(streams[i]->endpoint->id())
                    : static_cast<uint32_t>(fabric_.select_implicit_endpoint(
                          cfg.implicit_policy, new_ctx, Role::receiver));
  }

  // Phase 2: gather endpoint lists at the root; phase 3: broadcast the full
  // (rank, index) -> endpoint table.
  std::vector<std::vector<uint32_t>> all(par.n_ranks);
  if (rank_ == root) {
    all[root] = my_eps;
    for (int r = 0; r < par.n_ranks; ++r) {
      if (r == root) continue;
      uint32_t n = 0;
      ctrl_recv(par, r, TAG_SIZE, &n, sizeof(n));
      all[r].resize(n);
      if (n > 0)
        ctrl_recv(par, r, TAG_DATA, all[r].data(), n * sizeof(uint32_t));
    }
    std::vector<uint32_t> blob;
    for (const auto& eps : all) {
      blob.push_back(static_cast<uint32_t>(eps.size()));
      blob.insert(blob.end(), eps.begin(), eps.end());
    }
    uint32_t blob_n = static_cast<uint32_t>(blob.size());
    for (int r = 0; r < par.n_ranks; ++r) {
      if (r == root) continue;
      ctrl_send(par, r, TAG_SIZE, &blob_n, sizeof(blob_n));
      ctrl_send(par, r, TAG_DATA, blob.data(), blob_n * sizeof(uint32_t));
    }
  } else {
    uint32_t n = static_cast<uint32_t>(my_eps.size());
    ctrl_send(par, root, TAG_SIZE, &n, sizeof(n));
    if (n > 0) ctrl_send(par, root, TAG_DATA, my_eps.data(), n * sizeof(uint32_t));
    uint32_t blob_n = 0;
    ctrl_recv(par, root, TAG_SIZE, &blob_n, sizeof(blob_n));
    std::vector<uint32_t> blob(blob_n);
    ctrl_recv(par, root, TAG_DATA, blob.data(), blob_n * sizeof(uint32_t));
    size_t off = 0;
    for (int r = 0; r < par.n_ranks; ++r) {
      uint32_t cnt = blob[off++];
      all[r].assign(blob.begin() + off, blob.begin() + off + cnt);
      off += cnt;
    }
  }

  auto nc = std::make_unique<CommState>();
  nc->ctx = new_ctx;
  nc->n_ranks = par.n_ranks;
  nc->rank = rank_;
  nc->multiplex = multiplex;
  nc->local_streams = streams;
  nc->counts.resize(par.n_ranks);
  nc->table.resize(par.n_ranks);
  for (int r = 0; r < par.n_ranks; ++r) {
    nc->counts[r] = static_cast<int>(all[r].size());
    nc->table[r].assign(all[r].begin(), all[r].end());
  }
  nc->send_eps.resize(streams.size());
  nc->recv_eps.resize(streams.size());
  for (size_t i = 0; i < streams.size(); ++i) {
    if (streams[i] != nullptr) {
      nc->send_eps[i] = streams[i]->endpoint;
      nc->recv_eps[i] = streams[i]->endpoint;
    } else {
      nc->recv_eps[i] = &fabric_.endpoint(static_cast<int>(my_eps[i]));
      nc->send_eps[i] = &fabric_.endpoint(fabric_.select_implicit_endpoint(
          cfg.implicit_policy, new_ctx, Role::sender));
    }
  }
  nc->seq_p2p.assign(streams.size(), 0);
  for (Stream* s : streams)
    if (s != nullptr) s->refcount.fetch_add(1, std::memory_order_acq_rel);

  CommState* ptr = nc.get();
  {
    std::lock_guard<std::mutex> lk(registry_mu_);
    comms_[new_ctx] = std::move(nc);
  }
  return CommH{ptr};
}

Result<void> Proc::comm_free(CommH comm) {
  if (!comm.valid()) return Err::invalid_comm;
  CommState& c = *comm.p;
  if (&c == world_comm_) return Err::invalid_comm;
  // Local check before the rendezvous; entering the barrier with pending
  // operations would strand members whose check fails.
  if (c.pending.load(std::memory_order_acquire) > 0) return Err::pending_ops;
  barrier(comm);
  for (Stream* s : c.local_streams)
    if (s != nullptr) s->refcount.fetch_sub(1, std::memory_order_acq_rel);
  if (rank_ == 0) world_->retire_ctx(c.ctx);
  {
    std::lock_guard<std::mutex> lk(registry_mu_);
    comms_.erase(c.ctx);
  }
  return Result<void>::success();
}

}  // namespace streamix
