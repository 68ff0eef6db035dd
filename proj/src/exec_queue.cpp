#include "streamix/exec_queue.hpp"

#include <atomic>
#include <unordered_set>

namespace streamix {

namespace {
std::mutex g_registry_mu;
std::unordered_set<ExecQueue*> g_live_queues;
std::atomic<uint64_t> g_next_queue_id{1};
}  // namespace

ExecQueue::ExecQueue() : id_(g_next_queue_id.fetch_add(1)) {
  worker_ = std::thread([this] { worker_main(); });
}

ExecQueue::~ExecQueue() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    stop_ = true;
  }
  cv_work_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void ExecQueue::worker_main() {
  std::unique_lock<std::mutex> lk(mu_);
  for (;;) {
    cv_work_.wait(lk, [this] { return stop_ || !items_.empty(); });
    if (items_.empty()) {
      if (stop_) return;
      continue;
    }
    Item item = std::move(items_.front());
    items_.pop_front();
    start_log_.push_back(item.item_id);
    lk.unlock();
    // Blocking items complete inside fn (they wait on the fabric); the queue
    // does not advance until fn returns either way.
    if (item.fn) item.fn();
    lk.lock();
    ++done_;
    cv_done_.notify_all();
  }
}

uint64_t ExecQueue::append(Item item) {
  uint64_t id;
  {
    std::lock_guard<std::mutex> lk(mu_);
    id = ++enqueued_;
    item.item_id = id;
    items_.push_back(std::move(item));
  }
  cv_work_.notify_one();
  return id;
}

void ExecQueue::enqueue_task(std::function<void()> task) {
  Item it;
  it.fn = std::move(task);
  append(std::move(it));
}

void ExecQueue::synchronize() {
  std::unique_lock<std::mutex> lk(mu_);
  uint64_t target = enqueued_;
  cv_done_.wait(lk, [&] { return done_ >= target; });
}

size_t ExecQueue::pending_items() const {
  std::lock_guard<std::mutex> lk(mu_);
  return static_cast<size_t>(enqueued_ - done_);
}

std::vector<uint64_t> ExecQueue::start_order() const {
  std::lock_guard<std::mutex> lk(mu_);
  return start_log_;
}

ExecQueue* exec_queue_create() {
  auto* q = new ExecQueue();
  std::lock_guard<std::mutex> lk(g_registry_mu);
  g_live_queues.insert(q);
  return q;
}

Result<void> exec_queue_destroy(ExecQueue* q) {
  if (q == nullptr) return Err::queue_busy;
  if (q->pending_items() > 0) return Err::queue_busy;
  {
    std::lock_guard<std::mutex> lk(g_registry_mu);
    g_live_queues.erase(q);
  }
  delete q;
  return Result<void>::success();
}

bool exec_queue_is_live(ExecQueue* q) {
  std::lock_guard<std::mutex> lk(g_registry_mu);
  return g_live_queues.count(q) != 0;
}

void queue_synchronize(ExecQueue* q) { q->synchronize(); }

}  // namespace streamix
