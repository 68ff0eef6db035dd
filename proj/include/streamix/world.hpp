#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <unordered_map>
#include <vector>

#include "streamix/comm.hpp"
#include "streamix/exec_queue.hpp"
#include "streamix/fabric.hpp"
#include "streamix/info.hpp"
#include "streamix/request.hpp"
#include "streamix/result.hpp"
#include "streamix/stream.hpp"

namespace streamix {

class World;

/// One logical process: an endpoint fabric plus stream and communicator
/// registries. Every operation below is issued "as" this rank; collective
/// operations must be called once per member (normally from one thread per
/// rank) and calls on the same communicator must not overlap within a
/// process.
class Proc {
 public:
  int rank() const { return rank_; }
  World& world() { return *world_; }
  Fabric& fabric() { return fabric_; }
  CommH world_comm() { return CommH{world_comm_}; }

  // --- streams ---

  /// No hints: a serial-context stream on an exclusive explicit endpoint.
  /// Hints: type="exec_queue" with value=hex(queue pointer) wraps an
  /// execution queue on a shared endpoint; endpoint_policy="shared" opts a
  /// serial-context stream into round-robin endpoint sharing.
  Result<int> stream_create(const Info& info);
  Result<int> stream_create() { return stream_create(Info{}); }

  Result<void> stream_free(int stream_id);

  /// Registry lookup; nullptr when the id is unknown or already freed.
  Stream* stream_get(int stream_id);

  // --- communicators (collective: every member must call) ---

  Result<CommH> stream_comm_create(CommH parent, int stream_id);
  Result<CommH> stream_comm_create_multiple(CommH parent,
                                            const std::vector<int>& stream_ids);
  Result<void> comm_free(CommH comm);
  Result<void> barrier(CommH comm);

  // --- point-to-point ---

  Result<Req> isend(CommH comm, const void* buf, int count, Elem elem,
                    int dest, int tag);
  Result<Req> irecv(CommH comm, void* buf, int capacity, Elem elem, int source,
                    int tag);
  Result<Status> send(CommH comm, const void* buf, int count, Elem elem,
                      int dest, int tag);
  Result<Status> recv(CommH comm, void* buf, int capacity, Elem elem,
                      int source, int tag);

  Result<Req> stream_isend(CommH comm, const void* buf, int count, Elem elem,
                           int dest, int tag, int src_idx, int dst_idx);
  Result<Req> stream_irecv(CommH comm, void* buf, int capacity, Elem elem,
                           int source, int tag, int src_idx, int dst_idx);
  Result<Status> stream_send(CommH comm, const void* buf, int count, Elem elem,
                             int dest, int tag, int src_idx, int dst_idx);
  Result<Status> stream_recv(CommH comm, void* buf, int capacity, Elem elem,
                             int source, int tag, int src_idx, int dst_idx);

  /// Blocks, driving progress only on the issuing request's endpoint.
  Result<Status> wait(const Req& request);
  Result<std::vector<Status>> waitall(const std::vector<Req>& requests);

  // --- enqueue operations (comm must carry a queue-backed stream) ---

  Result<void> send_enqueue(CommH comm, const void* buf, int count, Elem elem,
                            int dest, int tag);
  Result<void> recv_enqueue(CommH comm, void* buf, int capacity, Elem elem,
                            int source, int tag);
  Result<Req> isend_enqueue(CommH comm, const void* buf, int count, Elem elem,
                            int dest, int tag);
  Result<Req> irecv_enqueue(CommH comm, void* buf, int capacity, Elem elem,
                            int source, int tag);
  Result<void> wait_enqueue(const Req& request);
  Result<void> waitall_enqueue(const std::vector<Req>& requests);

 private:
  friend class World;

  Proc(World* w, int rank, int n_ranks, const FabricConfig& cfg);

  void build_world_comm();
  Result<CommH> create_comm(CommH parent, const std::vector<int>& stream_ids,
                            bool multiplex);

  // Rendezvous plumbing on a communicator's collective wire context.
  void ctrl_send(CommState& c, int dest, int tag, const void* buf, size_t len);
  size_t ctrl_recv(CommState& c, int source, int tag, void* buf, size_t cap);

  // bind, when given, is the request handle completed by the operation
  // (enqueue shells created before the worker registers them).
  Req post_send(CommState& c, const void* buf, size_t bytes, int dest, int tag,
                int src_slot, int wire_src_idx, int wire_dst_idx,
                bool collective, Req bind = nullptr);
  Req post_recv(CommState& c, void* buf, size_t cap, int source, int tag,
                int pattern_src_idx, int dst_slot, int wire_dst_idx,
                bool collective, Req bind = nullptr);

  ExecQueue* enqueue_queue(const CommState& c) const;

  World* world_;
  int rank_;
  Fabric fabric_;

  std::mutex registry_mu_;
  std::unordered_map<int, std::unique_ptr<Stream>> streams_;
  int next_stream_id_ = 1;
  std::unordered_map<uint32_t, std::unique_ptr<CommState>> comms_;
  CommState* world_comm_ = nullptr;
};

/// A set of logical processes wired together by in-process loopback channels.
/// Construction builds every process, its endpoint pool, and the bootstrap
/// world communicator (context id 0).
class World {
 public:
  explicit World(int n_ranks) : World(n_ranks, FabricConfig::from_env()) {}
  World(int n_ranks, const FabricConfig& cfg);

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  int size() const { return static_cast<int>(procs_.size()); }
  Proc& proc(int rank) { return *procs_[rank]; }
  const FabricConfig& config() const { return cfg_; }

  // Context-id allocation: retired ids are recycled lowest-first.
  uint32_t alloc_ctx();
  void retire_ctx(uint32_t ctx);

 private:
  FabricConfig cfg_;
  std::vector<std::unique_ptr<Proc>> procs_;
  std::mutex ctx_mu_;
  uint32_t next_ctx_ = 1;
  std::priority_queue<uint32_t, std::vector<uint32_t>, std::greater<>>
      retired_ctx_;
};

/// Runs fn(proc) once per rank on its own thread and joins. Collective calls
/// in tests and the benchmark are driven through this.
void run_ranks(World& w, const std::function<void(Proc&)>& fn);

}  // namespace streamix
