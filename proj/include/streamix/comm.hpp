#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "streamix/endpoint.hpp"
#include "streamix/stream.hpp"

namespace streamix {

/// Per-member communicator state. The group is always the full world;
/// context ids are allocated collectively and equal on every member.
/// remote endpoint tables are immutable after creation.
struct CommState {
  uint32_t ctx = 0;
  int n_ranks = 0;
  int rank = -1;
  bool multiplex = false;

  // Attached local streams: empty for the bootstrap world communicator, one
  // entry for a stream communicator (nullptr = STREAM_NULL), an indexed list
  // for a multiplex communicator.
  std::vector<Stream*> local_streams;

  std::vector<int> counts;               // per member stream count (1 if none)
  std::vector<std::vector<int>> table;   // (member, index) -> endpoint id
  std::vector<Endpoint*> send_eps;       // per local index
  std::vector<Endpoint*> recv_eps;       // per local index
  std::vector<uint64_t> seq_p2p;         // per local index, wire sequence
  uint64_t seq_coll = 0;                 // rendezvous-context sequence

  std::atomic<int> pending{0};  // incomplete requests referencing this comm
};

/// Opaque communicator handle. Like an MPI handle it dangles after
/// comm_free; using a freed handle is a caller error.
struct CommH {
  CommState* p = nullptr;
  bool valid() const { return p != nullptr; }
};

}  // namespace streamix
