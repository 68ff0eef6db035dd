#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streamix/result.hpp"

namespace streamix::bench {

/// Locking regime under test. global_lock serializes each process on one
/// critical section; per_vci_implicit spreads per-thread communicators over
/// implicitly hashed endpoints with per-endpoint locks; stream_explicit gives
/// each thread an exclusive stream whose endpoint runs lock-free.
enum class Mode { global_lock, per_vci_implicit, stream_explicit };

struct BenchConfig {
  int threads = 1;
  int msg_bytes = 8;
  int iters = 20000;  // data messages per thread (rounded down to batches)
  int window = 64;    // outstanding requests per batch
  int warmup = 64;    // untimed messages per thread before the clock starts
  Mode mode = Mode::per_vci_implicit;
  std::string csv_path;  // empty = don't write
};

struct BenchResult {
  Mode mode = Mode::per_vci_implicit;
  int threads = 0;
  int msg_bytes = 0;
  long iters = 0;  // completed data messages per thread
  std::vector<long> per_thread;
  double elapsed_s = 0.0;
  double msgs_per_s = 0.0;
};

/// Two logical processes, `threads` paired driver threads each; every pair
/// exchanges fixed-size messages over its own communicator in
/// window-batched isend/irecv + waitall rounds.
Result<BenchResult> run_msgrate(const BenchConfig& cfg);

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);  // global|pervci|stream

std::string csv_header();
std::string csv_row(const BenchResult& r);
Result<void> append_csv(const std::string& path, const BenchResult& r);

}  // namespace streamix::bench
