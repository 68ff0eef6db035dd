#include "streamix/bench.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "streamix/world.hpp"

namespace streamix::bench {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kDataTag = 0;
constexpr int kAckTag = 1;

// Driver threads cannot return errors; any fabric failure here is a harness
// bug, not a measurable outcome.
template <typename R>
decltype(auto) must(R&& r) {
  if (!r.ok()) {
    std::fprintf(stderr, "bench driver failed: %s\n",
                 std::string(to_string(r.error())).c_str());
    std::abort();
  }
  return std::forward<R>(r);
}

// Start-line rendezvous for the timed phase.
class StartGate {
 public:
  explicit StartGate(int n) : waiting_for_(n) {}
  void arrive_and_wait() {
    std::unique_lock<std::mutex> lk(mu_);
    if (--waiting_for_ == 0) {
      cv_.notify_all();
      return;
    }
    cv_.wait(lk, [this] { return waiting_for_ == 0; });
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int waiting_for_;
};

struct ThreadTimes {
  Clock::time_point start;
  Clock::time_point stop;
  long completed = 0;
};

void sender_loop(Proc& p, CommH comm, int msg_bytes, int window, int batches,
                 ThreadTimes* times) {
  std::vector<uint8_t> buf(std::max(msg_bytes, 1), 0xa5);
  uint8_t ack = 0;
  std::vector<Req> reqs;
  reqs.reserve(window);
  for (int b = 0; b < batches; ++b) {
    reqs.clear();
    for (int i = 0; i < window; ++i)
      reqs.push_back(*must(p.isend(comm, buf.data(), msg_bytes, Elem::byte, 1,
                                   kDataTag)));
    must(p.waitall(reqs));
    // Credit from the receiver bounds the channel backlog to one window.
    must(p.recv(comm, &ack, 1, Elem::byte, 1, kAckTag));
    if (times != nullptr) times->completed += window;
  }
}

void receiver_loop(Proc& p, CommH comm, int msg_bytes, int window, int batches,
                   ThreadTimes* times) {
  std::vector<std::vector<uint8_t>> bufs(
      window, std::vector<uint8_t>(std::max(msg_bytes, 1)));
  uint8_t ack = 1;
  std::vector<Req> reqs;
  reqs.reserve(window);
  for (int b = 0; b < batches; ++b) {
    reqs.clear();
    for (int i = 0; i < window; ++i)
      reqs.push_back(*must(p.irecv(comm, bufs[i].data(), msg_bytes, Elem::byte,
                                   0, kDataTag)));
    auto all = must(p.waitall(reqs));
    for (const auto& st : *all) {
      if (st.truncated || st.bytes != static_cast<size_t>(msg_bytes))
        std::abort();
    }
    must(p.send(comm, &ack, 1, Elem::byte, 0, kAckTag));
    if (times != nullptr) times->completed += window;
  }
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::global_lock: return "global";
    case Mode::per_vci_implicit: return "pervci";
    case Mode::stream_explicit: return "stream";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "global") return Mode::global_lock;
  if (s == "pervci") return Mode::per_vci_implicit;
  if (s == "stream") return Mode::stream_explicit;
  return std::nullopt;
}

Result<BenchResult> run_msgrate(const BenchConfig& cfg) {
  if (cfg.threads < 1 || cfg.msg_bytes < 0 || cfg.window < 1 || cfg.iters < 1)
    return Err::config_invalid;

  FabricConfig fc = FabricConfig::from_env();
  switch (cfg.mode) {
    case Mode::global_lock:
      fc.implicit_pool_size = std::max(1, fc.implicit_pool_size);
      fc.explicit_pool_size = 0;
      fc.exclusion_mode = Exclusion::global;
      fc.implicit_policy = ImplicitPolicy::one_to_one;
      break;
    case Mode::per_vci_implicit:
      fc.implicit_pool_size = std::max(cfg.threads, fc.implicit_pool_size);
      fc.explicit_pool_size = 0;
      fc.exclusion_mode = Exclusion::per_endpoint;
      fc.implicit_policy = ImplicitPolicy::one_to_one;
      break;
    case Mode::stream_explicit:
      fc.implicit_pool_size = std::max(1, fc.implicit_pool_size);
      fc.explicit_pool_size = std::max(cfg.threads, fc.explicit_pool_size);
      fc.exclusion_mode = Exclusion::per_endpoint;
      fc.implicit_policy = ImplicitPolicy::one_to_one;
      break;
  }
  if (fc.implicit_pool_size + fc.explicit_pool_size > MAX_POOL_SIZE)
    return Err::config_invalid;

  World w(2, fc);

  // Per-thread communicators, created collectively by one driver per rank.
  std::vector<CommH> comms0(cfg.threads), comms1(cfg.threads);
  {
    Err failed = Err::ok;
    run_ranks(w, [&](Proc& p) {
      for (int t = 0; t < cfg.threads; ++t) {
        int stream_id = STREAM_NULL;
        if (cfg.mode == Mode::stream_explicit) {
          auto s = p.stream_create();
          if (!s.ok()) {
            failed = s.error();
            return;
          }
          stream_id = *s;
        }
        auto c = p.stream_comm_create(p.world_comm(), stream_id);
        if (!c.ok()) {
          failed = c.error();
          return;
        }
        (p.rank() == 0 ? comms0 : comms1)[t] = *c;
      }
    });
    if (failed != Err::ok) return failed;
  }

  int batches = std::max(1, cfg.iters / cfg.window);
  int warmup_batches = cfg.warmup > 0 ? std::max(1, cfg.warmup / cfg.window) : 0;
  long iters_eff = static_cast<long>(batches) * cfg.window;

  std::vector<ThreadTimes> times(2 * cfg.threads);
  StartGate gate(2 * cfg.threads);

  auto driver = [&](int rank, int t) {
    Proc& p = w.proc(rank);
    CommH comm = (rank == 0 ? comms0 : comms1)[t];
    ThreadTimes& tt = times[rank * cfg.threads + t];
    if (rank == 0) {
      sender_loop(p, comm, cfg.msg_bytes, cfg.window, warmup_batches, nullptr);
      gate.arrive_and_wait();
      tt.start = Clock::now();
      sender_loop(p, comm, cfg.msg_bytes, cfg.window, batches, &tt);
      tt.stop = Clock::now();
    } else {
      receiver_loop(p, comm, cfg.msg_bytes, cfg.window, warmup_batches, nullptr);
      gate.arrive_and_wait();
      tt.start = Clock::now();
      receiver_loop(p, comm, cfg.msg_bytes, cfg.window, batches, &tt);
      tt.stop = Clock::now();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(2 * cfg.threads);
  for (int rank = 0; rank < 2; ++rank)
    for (int t = 0; t < cfg.threads; ++t)
      threads.emplace_back(driver, rank, t);
  for (auto& th : threads) th.join();

  auto t0 = times[0].start;
  auto t1 = times[0].stop;
  for (const auto& tt : times) {
    t0 = std::min(t0, tt.start);
    t1 = std::max(t1, tt.stop);
  }
  double elapsed = std::chrono::duration<double>(t1 - t0).count();
  if (elapsed <= 0) elapsed = 1e-9;

  BenchResult res;
  res.mode = cfg.mode;
  res.threads = cfg.threads;
  res.msg_bytes = cfg.msg_bytes;
  res.iters = iters_eff;
  res.per_thread.resize(cfg.threads);
  long total = 0;
  for (int t = 0; t < cfg.threads; ++t) {
    // One count per data message, taken on the receive side.
    res.per_thread[t] = times[cfg.threads + t].completed;
    total += res.per_thread[t];
  }
  res.elapsed_s = elapsed;
  res.msgs_per_s = static_cast<double>(total) / elapsed;

  if (!cfg.csv_path.empty()) {
    if (auto r = append_csv(cfg.csv_path, res); !r.ok()) return r.error();
  }
  return res;
}

std::string csv_header() { return "mode,threads,msg_bytes,iters,elapsed_s,msgs_per_s"; }

std::string csv_row(const BenchResult& r) {
  std::ostringstream os;
  os << mode_name(r.mode) << ',' << r.threads << ',' << r.msg_bytes << ','
     << r.iters << ',' << r.elapsed_s << ',' << r.msgs_per_s;
  return os.str();
}

Result<void> append_csv(const std::string& path, const BenchResult& r) {
  bool fresh = false;
  if (std::FILE* probe = std::fopen(path.c_str(), "r"))
    std::fclose(probe);
  else
    fresh = true;
  std::FILE* f = std::fopen(path.c_str(), "a");
  if (f == nullptr) return Err::config_invalid;
  if (fresh) std::fprintf(f, "%s\n", csv_header().c_str());
  std::fprintf(f, "%s\n", csv_row(r).c_str());
  std::fclose(f);
  return Result<void>::success();
}

}  // namespace streamix::bench
