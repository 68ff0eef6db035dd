#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "streamix/request.hpp"
#include "streamix/result.hpp"

namespace streamix {

/// Simulated device execution queue: a FIFO of work items drained in order by
/// one dedicated worker thread. Blocking items hold the queue until their
/// communication completes; nonblocking items finish at registration and the
/// queue moves on.
class ExecQueue {
 public:
  ExecQueue();
  ~ExecQueue();

  ExecQueue(const ExecQueue&) = delete;
  ExecQueue& operator=(const ExecQueue&) = delete;

  uint64_t id() const { return id_; }

  /// Appends a host task; runs on the worker after all earlier items are
  /// done. Never blocks the caller.
  void enqueue_task(std::function<void()> task);

  /// Blocks until every item enqueued before this call is done.
  void synchronize();

  size_t pending_items() const;

  /// Item ids in the order the worker began them (audit surface; read after
  /// synchronize()).
  std::vector<uint64_t> start_order() const;

 private:
  friend class Proc;
  friend Result<void> exec_queue_destroy(ExecQueue*);

  struct Item {
    uint64_t item_id = 0;
    bool blocking = false;           // queue stalls until fn's request is done
    std::function<void()> fn;        // runs on the worker
  };

  uint64_t append(Item item);  // returns item id
  void worker_main();

  uint64_t id_;
  mutable std::mutex mu_;
  std::condition_variable cv_work_;
  std::condition_variable cv_done_;
  std::deque<Item> items_;
  uint64_t enqueued_ = 0;
  uint64_t done_ = 0;
  bool stop_ = false;
  std::vector<uint64_t> start_log_;
  std::thread worker_;
};

ExecQueue* exec_queue_create();

/// Fails with QUEUE_BUSY while items are pending; otherwise joins the worker
/// and destroys the queue.
Result<void> exec_queue_destroy(ExecQueue* q);

/// True while q is a live (created, not yet destroyed) queue. Streams created
/// from a hex-encoded queue handle validate it here.
bool exec_queue_is_live(ExecQueue* q);

void queue_synchronize(ExecQueue* q);

}  // namespace streamix
