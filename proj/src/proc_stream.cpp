#include <cstring>

#include "streamix/world.hpp"

namespace streamix {

Result<int> Proc::stream_create(const Info& info) {
  Stream::Kind kind = Stream::Kind::serial_context;
  ExecQueue* queue = nullptr;

  if (auto type = info.get("type")) {
    if (*type != "exec_queue") return Err::bad_hint;
    kind = Stream::Kind::exec_queue;
    auto bytes = info.get_hex("value");
    if (!bytes.ok() || bytes->size() != sizeof(ExecQueue*)) return Err::bad_hint;
    std::memcpy(&queue, bytes->data(), sizeof(queue));
    if (!exec_queue_is_live(queue)) return Err::bad_hint;
  }

  // Serial-context streams default to an exclusive endpoint; queue-backed
  // streams share endpoints round-robin (one progress agent polls few
  // endpoints, duplicates are expected).
  AcquireMode mode = kind == Stream::Kind::exec_queue ? AcquireMode::shared
                                                      : AcquireMode::exclusive;
  if (auto policy = info.get("endpoint_policy")) {
    if (*policy == "shared")
      mode = AcquireMode::shared;
    else if (*policy == "exclusive")
      mode = AcquireMode::exclusive;
    else
      return Err::bad_hint;
  }

  auto ep = fabric_.endpoint_acquire(PoolClass::explicit_, mode);
  if (!ep.ok()) return ep.error();

  std::lock_guard<std::mutex> lk(registry_mu_);
  int id = next_stream_id_++;
  auto s = std::make_unique<Stream>();
  s->id = id;
  s->kind = kind;
  s->endpoint = *ep;
  s->exclusive = mode == AcquireMode::exclusive;
  s->queue = queue;
  streams_[id] = std::move(s);
  return id;
}

Result<void> Proc::stream_free(int stream_id) {
  std::lock_guard<std::mutex> lk(registry_mu_);
  if (stream_id == STREAM_NULL) return Err::invalid_stream;
  auto it = streams_.find(stream_id);
  if (it == streams_.end()) return Err::invalid_stream;
  Stream& s = *it->second;
  if (s.refcount.load(std::memory_order_acquire) > 0) return Err::in_use;
  if (auto rel = fabric_.endpoint_release(s.endpoint); !rel.ok())
    return rel.error();  // stream stays valid and held
  streams_.erase(it);
  return Result<void>::success();
}

Stream* Proc::stream_get(int stream_id) {
  std::lock_guard<std::mutex> lk(registry_mu_);
  auto it = streams_.find(stream_id);
  return it == streams_.end() ? nullptr : it->second.get();
}

}  // namespace streamix
