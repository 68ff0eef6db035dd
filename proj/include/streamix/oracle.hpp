#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace streamix::oracle {

/// One step of a per-rank program. Sends carry a concrete tag and
/// destination; receives may use ANY_SOURCE / ANY_TAG.
struct Op {
  bool is_send = false;
  int peer = 0;  // send: destination rank; recv: source rank or ANY_SOURCE
  int tag = 0;   // recv side may be ANY_TAG

  static Op send_to(int dest, int tag) { return {true, dest, tag}; }
  static Op recv_from(int source, int tag) { return {false, source, tag}; }
};

/// Op identity: (rank << 16) | position within that rank's program.
using OpId = uint64_t;

constexpr OpId op_id(int rank, int pos) {
  return (static_cast<uint64_t>(rank) << 16) | static_cast<uint64_t>(pos);
}

/// Match pairing of one execution: which send each completed receive got,
/// plus the leftovers.
struct Outcome {
  std::map<OpId, OpId> pairs;  // recv id -> send id
  std::set<OpId> unmatched_recvs;
  std::set<OpId> unmatched_sends;

  bool operator==(const Outcome&) const = default;
};

/// Single-queue reference matcher: replays a linearized op order against one
/// posted list and one unexpected list per destination. Independent of the
/// endpoint/channel machinery it is used to check.
Outcome reference_outcome(const std::vector<std::vector<Op>>& programs,
                          const std::vector<int>& interleaving);

struct Report {
  uint64_t program_pairs = 0;
  uint64_t executions = 0;  // one per (program pair, interleaving)
  uint64_t divergences = 0;
  std::string first_divergence;  // empty when none
};

/// Replays every interleaving of the two rank programs through the real
/// runtime (draining progress after each step) and compares pairings with
/// the reference matcher. Returns executions/divergences for this pair.
void check_program_pair(const std::vector<Op>& rank0,
                        const std::vector<Op>& rank1, Report& report);

/// Enumerates small two-rank program families (unidirectional tag/wildcard
/// combinations up to 3 sends and 3 receives per rank, plus bidirectional
/// programs with self-sends) capped at max_ops ops per rank, and checks every
/// interleaving of every pair. max_ops is clamped to [0, 6].
Report run_interleaving_oracle(int max_ops);

}  // namespace streamix::oracle
