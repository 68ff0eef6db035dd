#include <thread>

#include "streamix/world.hpp"

namespace streamix {

namespace {
Result<void> check_args(const CommState& c, int count, int peer, int tag,
                        bool recv_side) {
  if (recv_side) {
    if (peer != ANY_SOURCE && (peer < 0 || peer >= c.n_ranks))
      return Err::invalid_rank;
    if (tag != ANY_TAG && tag < 0) return Err::invalid_tag;
  } else {
    if (peer < 0 || peer >= c.n_ranks) return Err::invalid_rank;
    if (tag < 0) return Err::invalid_tag;
  }
  if (count < 0) return Err::invalid_count;
  return Result<void>::success();
}
}  // namespace

ExecQueue* Proc::enqueue_queue(const CommState& c) const {
  if (c.multiplex || c.local_streams.size() != 1) return nullptr;
  Stream* s = c.local_streams[0];
  if (s == nullptr || s->kind != Stream::Kind::exec_queue) return nullptr;
  return s->queue;
}

Result<void> Proc::send_enqueue(CommH comm, const void* buf, int count,
                                Elem elem, int dest, int tag) {
  CommState& c = *comm.p;
  ExecQueue* q = enqueue_queue(c);
  if (q == nullptr) return Err::not_enqueue_comm;
  if (auto v = check_args(c, count, dest, tag, false); !v.ok())
    return v.error();
  size_t bytes = static_cast<size_t>(count) * elem_size(elem);
  ExecQueue::Item item;
  item.blocking = true;
  item.fn = [this, &c, buf, bytes, dest, tag] {
    // Eager transport: registration completes the communication too.
    post_send(c, buf, bytes, dest, tag, 0, IDX_NONE, IDX_NONE, false);
  };
  q->append(std::move(item));
  return Result<void>::success();
}

Result<void> Proc::recv_enqueue(CommH comm, void* buf, int capacity, Elem elem,
                                int source, int tag) {
  CommState& c = *comm.p;
  ExecQueue* q = enqueue_queue(c);
  if (q == nullptr) return Err::not_enqueue_comm;
  if (auto v = check_args(c, capacity, source, tag, true); !v.ok())
    return v.error();
  size_t cap = static_cast<size_t>(capacity) * elem_size(elem);
  ExecQueue::Item item;
  item.blocking = true;
  item.fn = [this, &c, buf, cap, source, tag] {
    Req r = post_recv(c, buf, cap, source, tag, IDX_NONE, 0, IDX_NONE, false);
    // The queue stalls here until the message is delivered.
    wait(r);
  };
  q->append(std::move(item));
  return Result<void>::success();
}

Result<Req> Proc::isend_enqueue(CommH comm, const void* buf, int count,
                                Elem elem, int dest, int tag) {
  CommState& c = *comm.p;
  ExecQueue* q = enqueue_queue(c);
  if (q == nullptr) return Err::not_enqueue_comm;
  if (auto v = check_args(c, count, dest, tag, false); !v.ok())
    return v.error();
  size_t bytes = static_cast<size_t>(count) * elem_size(elem);

  auto shell = std::make_shared<Request>();
  shell->kind = Request::Kind::send;
  shell->ctx = c.ctx;
  shell->owner_rank = rank_;
  shell->stream_id = c.local_streams[0]->id;
  shell->queue = q;

  ExecQueue::Item item;
  item.fn = [this, &c, shell, buf, bytes, dest, tag] {
    post_send(c, buf, bytes, dest, tag, 0, IDX_NONE, IDX_NONE, false, shell);
  };
  q->append(std::move(item));
  return shell;
}

Result<Req> Proc::irecv_enqueue(CommH comm, void* buf, int capacity, Elem elem,
                                int source, int tag) {
  CommState& c = *comm.p;
  ExecQueue* q = enqueue_queue(c);
  if (q == nullptr) return Err::not_enqueue_comm;
  if (auto v = check_args(c, capacity, source, tag, true); !v.ok())
    return v.error();
  size_t cap = static_cast<size_t>(capacity) * elem_size(elem);

  auto shell = std::make_shared<Request>();
  shell->kind = Request::Kind::recv;
  shell->ctx = c.ctx;
  shell->owner_rank = rank_;
  shell->stream_id = c.local_streams[0]->id;
  shell->queue = q;

  ExecQueue::Item item;
  item.fn = [this, &c, shell, buf, cap, source, tag] {
    // Done at registration; completion arrives via a later wait_enqueue.
    post_recv(c, buf, cap, source, tag, IDX_NONE, 0, IDX_NONE, false, shell);
  };
  q->append(std::move(item));
  return shell;
}

Result<void> Proc::wait_enqueue(const Req& request) {
  return waitall_enqueue(std::vector<Req>{request});
}

Result<void> Proc::waitall_enqueue(const std::vector<Req>& requests) {
  if (requests.empty()) return Result<void>::success();
  for (const auto& r : requests)
    if (!r) return Err::invalid_request;
  ExecQueue* q = requests[0]->queue;
  for (const auto& r : requests)
    if (r->queue == nullptr || r->queue != q) return Err::stream_mismatch;

  ExecQueue::Item item;
  item.blocking = true;
  item.fn = [this, requests] {
    for (const auto& r : requests) {
      while (!r->complete()) {
        int ep = r->endpoint_id.load(std::memory_order_relaxed);
        if (ep < 0 || fabric_.progress_poll(fabric_.endpoint(ep)) == 0)
          std::this_thread::yield();
      }
    }
  };
  q->append(std::move(item));
  return Result<void>::success();
}

}  // namespace streamix
