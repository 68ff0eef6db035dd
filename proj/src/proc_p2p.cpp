#include <thread>

#include "streamix/world.hpp"

namespace streamix {

namespace {

Result<void> check_send_args(const CommState& c, int count, int dest, int tag) {
  if (dest < 0 || dest >= c.n_ranks) return Err::invalid_rank;
  if (count < 0) return Err::invalid_count;
  if (tag < 0) return Err::invalid_tag;
  return Result<void>::success();
}

Result<void> check_recv_args(const CommState& c, int capacity, int source,
                             int tag) {
  if (source != ANY_SOURCE && (source < 0 || source >= c.n_ranks))
    return Err::invalid_rank;
  if (capacity < 0) return Err::invalid_count;
  if (tag != ANY_TAG && tag < 0) return Err::invalid_tag;
  return Result<void>::success();
}

}  // namespace

Req Proc::post_send(CommState& c, const void* buf, size_t bytes, int dest,
                    int tag, int src_slot, int wire_src_idx, int wire_dst_idx,
                    bool collective, Req bind) {
  Endpoint& sep = *c.send_eps[src_slot];
  int dst_slot = wire_dst_idx == IDX_NONE ? 0 : wire_dst_idx;
  int dst_ep = c.table[dest][dst_slot];

  Envelope env;
  env.context_id = wire_ctx(c.ctx, collective);
  env.src_rank = static_cast<uint32_t>(rank_);
  env.src_idx = wire_src_idx;
  env.dst_idx = wire_dst_idx;
  env.tag = tag;
  env.payload_len = bytes;

  {
    // Sequence stamping and channel push happen inside the sender endpoint's
    // critical section (a no-op under the serial-context fast path).
    EndpointGuard guard(fabric_.global_mutex(), sep);
    env.seq = collective ? ++c.seq_coll : ++c.seq_p2p[src_slot];
    Channel& ch =
        world_->proc(dest).fabric_.endpoint(dst_ep).inbound(rank_, sep.id());
    ch.push(env, buf);
  }

  Req r = bind != nullptr ? bind : std::make_shared<Request>();
  r->kind = Request::Kind::send;
  r->ctx = c.ctx;
  r->owner_rank = rank_;
  r->endpoint_id.store(sep.id(), std::memory_order_relaxed);
  r->status.source = rank_;
  r->status.tag = tag;
  r->status.bytes = bytes;
  // Payload is copied into the channel at post time, so the send buffer is
  // immediately reusable and the request completes here.
  r->mark_complete();
  return r;
}

Req Proc::post_recv(CommState& c, void* buf, size_t cap, int source, int tag,
                    int pattern_src_idx, int dst_slot, int wire_dst_idx,
                    bool collective, Req bind) {
  Endpoint& rep = *c.recv_eps[dst_slot];

  Req r = bind != nullptr ? bind : std::make_shared<Request>();
  r->kind = Request::Kind::recv;
  r->ctx = c.ctx;
  r->owner_rank = rank_;
  r->endpoint_id.store(rep.id(), std::memory_order_relaxed);
  r->comm_pending = &c.pending;
  c.pending.fetch_add(1, std::memory_order_relaxed);

  RecvDesc desc;
  desc.pattern.wire_context = wire_ctx(c.ctx, collective);
  desc.pattern.source = source;
  desc.pattern.tag = tag;
  desc.pattern.src_idx = pattern_src_idx;
  desc.pattern.dst_idx = wire_dst_idx;
  desc.buf = static_cast<uint8_t*>(buf);
  desc.capacity = cap;
  desc.request = r;

  {
    EndpointGuard guard(fabric_.global_mutex(), rep);
    rep.post_receive(std::move(desc));
  }
  return r;
}

Result<Req> Proc::isend(CommH comm, const void* buf, int count, Elem elem,
                        int dest, int tag) {
  CommState& c = *comm.p;
  if (c.multiplex) return Err::multiplex_comm;
  if (auto v = check_send_args(c, count, dest, tag); !v.ok()) return v.error();
  return post_send(c, buf, static_cast<size_t>(count) * elem_size(elem), dest,
                   tag, 0, IDX_NONE, IDX_NONE, false);
}

Result<Req> Proc::irecv(CommH comm, void* buf, int capacity, Elem elem,
                        int source, int tag) {
  CommState& c = *comm.p;
  if (c.multiplex) return Err::multiplex_comm;
  if (auto v = check_recv_args(c, capacity, source, tag); !v.ok())
    return v.error();
  return post_recv(c, buf, static_cast<size_t>(capacity) * elem_size(elem),
                   source, tag, IDX_NONE, 0, IDX_NONE, false);
}

Result<Req> Proc::stream_isend(CommH comm, const void* buf, int count,
                               Elem elem, int dest, int tag, int src_idx,
                               int dst_idx) {
  CommState& c = *comm.p;
  if (!c.multiplex) return Err::not_multiplex;
  if (auto v = check_send_args(c, count, dest, tag); !v.ok()) return v.error();
  if (src_idx < 0 || src_idx >= c.counts[rank_]) return Err::invalid_index;
  if (dst_idx < 0 || dst_idx >= c.counts[dest]) return Err::invalid_index;
  return post_send(c, buf, static_cast<size_t>(count) * elem_size(elem), dest,
                   tag, src_idx, src_idx, dst_idx, false);
}

Result<Req> Proc::stream_irecv(CommH comm, void* buf, int capacity, Elem elem,
                               int source, int tag, int src_idx, int dst_idx) {
  CommState& c = *comm.p;
  if (!c.multiplex) return Err::not_multiplex;
  if (auto v = check_recv_args(c, capacity, source, tag); !v.ok())
    return v.error();
  // The posting context must be definite: a receive lands on one local
  // stream's endpoint.
  if (dst_idx == ANY_INDEX) return Err::wildcard_dst;
  if (dst_idx < 0 || dst_idx >= c.counts[rank_]) return Err::invalid_index;
  if (src_idx != ANY_INDEX) {
    if (src_idx < 0) return Err::invalid_index;
    if (source != ANY_SOURCE && src_idx >= c.counts[source])
      return Err::invalid_index;
  }
  return post_recv(c, buf, static_cast<size_t>(capacity) * elem_size(elem),
                   source, tag, src_idx, dst_idx, dst_idx, false);
}

Result<Status> Proc::wait(const Req& request) {
  if (!request || request->consumed || request->owner_rank != rank_)
    return Err::invalid_request;
  while (!request->complete()) {
    int ep = request->endpoint_id.load(std::memory_order_relaxed);
    if (ep < 0 || fabric_.progress_poll(fabric_.endpoint(ep)) == 0)
      std::this_thread::yield();
  }
  request->consumed = true;
  return request->status;
}

Result<std::vector<Status>> Proc::waitall(const std::vector<Req>& requests) {
  for (const auto& r : requests)
    if (!r || r->consumed || r->owner_rank != rank_)
      return Err::invalid_request;
  for (;;) {
    bool all_done = true;
    int progressed = 0;
    for (const auto& r : requests) {
      if (r->complete()) continue;
      all_done = false;
      int ep = r->endpoint_id.load(std::memory_order_relaxed);
      if (ep >= 0) progressed += fabric_.progress_poll(fabric_.endpoint(ep));
    }
    if (all_done) break;
    if (progressed == 0) std::this_thread::yield();
  }
  std::vector<Status> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    r->consumed = true;
    out.push_back(r->status);
  }
  return out;
}

Result<Status> Proc::send(CommH comm, const void* buf, int count, Elem elem,
                          int dest, int tag) {
  auto r = isend(comm, buf, count, elem, dest, tag);
  if (!r.ok()) return r.error();
  return wait(*r);
}

Result<Status> Proc::recv(CommH comm, void* buf, int capacity, Elem elem,
                          int source, int tag) {
  auto r = irecv(comm, buf, capacity, elem, source, tag);
  if (!r.ok()) return r.error();
  return wait(*r);
}

Result<Status> Proc::stream_send(CommH comm, const void* buf, int count,
                                 Elem elem, int dest, int tag, int src_idx,
                                 int dst_idx) {
  auto r = stream_isend(comm, buf, count, elem, dest, tag, src_idx, dst_idx);
  if (!r.ok()) return r.error();
  return wait(*r);
}

Result<Status> Proc::stream_recv(CommH comm, void* buf, int capacity, Elem elem,
                                 int source, int tag, int src_idx,
                                 int dst_idx) {
  auto r = stream_irecv(comm, buf, capacity, elem, source, tag, src_idx,
                        dst_idx);
  if (!r.ok()) return r.error();
  return wait(*r);
}

}  // namespace streamix
