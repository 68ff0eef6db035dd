#include "streamix/oracle.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <sstream>

#include "streamix/world.hpp"

namespace streamix::oracle {

namespace {

struct RefMsg {
  int src;
  int tag;
  OpId id;
};

struct RefRecv {
  int source;  // may be ANY_SOURCE
  int tag;     // may be ANY_TAG
  OpId id;
};

bool ref_accepts(const RefRecv& r, const RefMsg& m) {
  return (r.source == ANY_SOURCE || r.source == m.src) &&
         (r.tag == ANY_TAG || r.tag == m.tag);
}

}  // namespace

Outcome reference_outcome(const std::vector<std::vector<Op>>& programs,
                          const std::vector<int>& interleaving) {
  int n_ranks = static_cast<int>(programs.size());
  std::vector<std::deque<RefRecv>> posted(n_ranks);
  std::vector<std::deque<RefMsg>> unexpected(n_ranks);
  Outcome out;

  std::vector<int> pos(n_ranks, 0);
  for (int rank : interleaving) {
    const Op& op = programs[rank][pos[rank]];
    OpId id = op_id(rank, pos[rank]);
    ++pos[rank];
    if (op.is_send) {
      RefMsg m{rank, op.tag, id};
      auto& q = posted[op.peer];
      auto it = std::find_if(q.begin(), q.end(),
                             [&](const RefRecv& r) { return ref_accepts(r, m); });
      if (it != q.end()) {
        out.pairs[it->id] = m.id;
        q.erase(it);
      } else {
        unexpected[op.peer].push_back(m);
      }
    } else {
      RefRecv r{op.peer, op.tag, id};
      auto& q = unexpected[rank];
      auto it = std::find_if(q.begin(), q.end(),
                             [&](const RefMsg& m) { return ref_accepts(r, m); });
      if (it != q.end()) {
        out.pairs[r.id] = it->id;
        q.erase(it);
      } else {
        posted[rank].push_back(r);
      }
    }
  }
  for (int r = 0; r < n_ranks; ++r) {
    for (const auto& rx : posted[r]) out.unmatched_recvs.insert(rx.id);
    for (const auto& m : unexpected[r]) out.unmatched_sends.insert(m.id);
  }
  return out;
}

namespace {

void drain_all(World& w) {
  for (;;) {
    int n = 0;
    for (int r = 0; r < w.size(); ++r) {
      Fabric& f = w.proc(r).fabric();
      for (int e = 0; e < f.total_endpoints(); ++e)
        n += f.progress_poll(f.endpoint(e));
    }
    if (n == 0) return;
  }
}

/// Runs one interleaving through the runtime with a full drain after each
/// step, which pins message arrival order to the linearization and makes the
/// pairing deterministic.
Outcome execute_outcome(const std::vector<std::vector<Op>>& programs,
                        const std::vector<int>& interleaving) {
  FabricConfig cfg;
  cfg.implicit_pool_size = 1;
  cfg.explicit_pool_size = 0;
  cfg.exclusion_mode = Exclusion::per_endpoint;
  cfg.implicit_policy = ImplicitPolicy::one_to_one;
  World w(static_cast<int>(programs.size()), cfg);

  struct PendingRecv {
    OpId id;
    Req req;
    uint64_t buf = 0;
  };
  std::vector<PendingRecv> recvs;
  std::vector<uint64_t> send_payloads;  // keep alive until drained
  std::set<OpId> send_ids;
  send_payloads.reserve(interleaving.size());
  recvs.reserve(interleaving.size());

  std::vector<int> pos(programs.size(), 0);
  for (int rank : interleaving) {
    const Op& op = programs[rank][pos[rank]];
    OpId id = op_id(rank, pos[rank]);
    ++pos[rank];
    Proc& p = w.proc(rank);
    if (op.is_send) {
      send_payloads.push_back(id);
      auto r = p.isend(p.world_comm(), &send_payloads.back(), 8, Elem::byte,
                       op.peer, op.tag);
      if (!r.ok()) std::abort();
      send_ids.insert(id);
    } else {
      // recvs is pre-reserved: posted buffers must never relocate.
      recvs.push_back(PendingRecv{id, nullptr, 0});
      auto r = p.irecv(p.world_comm(), &recvs.back().buf, 8, Elem::byte,
                       op.peer, op.tag);
      if (!r.ok()) std::abort();
      recvs.back().req = *r;
    }
    drain_all(w);
  }
  drain_all(w);

  Outcome out;
  std::set<OpId> matched_sends;
  for (const auto& pr : recvs) {
    if (pr.req->complete()) {
      out.pairs[pr.id] = pr.buf;
      matched_sends.insert(pr.buf);
      // The reported source rank must agree with the sender identity baked
      // into the payload.
      if (pr.req->status.source != static_cast<int>(pr.buf >> 16))
        out.pairs[pr.id] = ~0ull;  // poison: counts as a divergence
    } else {
      out.unmatched_recvs.insert(pr.id);
    }
  }
  for (OpId s : send_ids)
    if (matched_sends.count(s) == 0) out.unmatched_sends.insert(s);
  return out;
}

std::string describe(const std::vector<Op>& prog) {
  std::ostringstream os;
  for (const auto& op : prog) {
    if (op.is_send)
      os << "S(to=" << op.peer << ",tag=" << op.tag << ") ";
    else
      os << "R(src=" << op.peer << ",tag=" << op.tag << ") ";
  }
  return os.str();
}

template <typename Fn>
void for_each_interleaving(int n0, int n1, Fn&& fn) {
  // All merges of two fixed sequences: permutations of n0 zeros, n1 ones.
  std::vector<int> order(n0, 0);
  order.insert(order.end(), n1, 1);
  do {
    fn(order);
  } while (std::next_permutation(order.begin(), order.end()));
}

}  // namespace

void check_program_pair(const std::vector<Op>& rank0,
                        const std::vector<Op>& rank1, Report& report) {
  report.program_pairs += 1;
  std::vector<std::vector<Op>> programs{rank0, rank1};
  for_each_interleaving(
      static_cast<int>(rank0.size()), static_cast<int>(rank1.size()),
      [&](const std::vector<int>& order) {
        report.executions += 1;
        Outcome expect = reference_outcome(programs, order);
        Outcome got = execute_outcome(programs, order);
        if (got != expect) {
          report.divergences += 1;
          if (report.first_divergence.empty()) {
            std::ostringstream os;
            os << "rank0=[" << describe(rank0) << "] rank1=[" << describe(rank1)
               << "] order=";
            for (int b : order) os << b;
            report.first_divergence = os.str();
          }
        }
      });
}

namespace {

// Unidirectional family: rank 0 sends with tags from {0,1}, rank 1 receives
// with every source/tag pattern combination.
void run_unidirectional(int max_per_rank, Report& report) {
  const int send_tags[] = {0, 1};
  const Op recv_patterns[] = {
      Op::recv_from(0, 0),          Op::recv_from(0, 1),
      Op::recv_from(0, ANY_TAG),    Op::recv_from(ANY_SOURCE, 0),
      Op::recv_from(ANY_SOURCE, 1), Op::recv_from(ANY_SOURCE, ANY_TAG),
  };
  int max_sends = std::min(3, max_per_rank);
  int max_recvs = std::min(3, max_per_rank);
  for (int s = 0; s <= max_sends; ++s) {
    for (int r = 0; r <= max_recvs; ++r) {
      if (s + r == 0) continue;
      std::vector<int> tag_choice(s, 0);
      for (;;) {
        std::vector<Op> sends;
        for (int i = 0; i < s; ++i)
          sends.push_back(Op::send_to(1, send_tags[tag_choice[i]]));
        std::vector<int> pat_choice(r, 0);
        for (;;) {
          std::vector<Op> recvs;
          for (int i = 0; i < r; ++i)
            recvs.push_back(recv_patterns[pat_choice[i]]);
          check_program_pair(sends, recvs, report);
          // odometer over patterns
          int k = r - 1;
          while (k >= 0 && ++pat_choice[k] == 6) pat_choice[k--] = 0;
          if (k < 0) break;
        }
        int k = s - 1;
        while (k >= 0 && ++tag_choice[k] == 2) tag_choice[k--] = 0;
        if (k < 0) break;
      }
    }
  }
}

// Bidirectional family with self-sends: every sequence over a four-op
// alphabet, capped in length, on both ranks.
void run_bidirectional(int max_per_rank, Report& report) {
  int cap = std::min(3, max_per_rank);
  auto alphabet_for = [](int rank) {
    int other = 1 - rank;
    return std::vector<Op>{
        Op::send_to(other, 0),
        Op::send_to(rank, 0),  // self-send
        Op::recv_from(ANY_SOURCE, ANY_TAG),
        Op::recv_from(other, 0),
    };
  };
  auto seqs_for = [&](int rank) {
    std::vector<std::vector<Op>> seqs;
    auto alpha = alphabet_for(rank);
    seqs.push_back({});
    size_t begin = 0;
    for (int len = 1; len <= cap; ++len) {
      size_t end = seqs.size();
      for (size_t i = begin; i < end; ++i) {
        for (const Op& op : alpha) {
          auto s = seqs[i];
          s.push_back(op);
          seqs.push_back(std::move(s));
        }
      }
      begin = end;
    }
    return seqs;
  };
  auto s0 = seqs_for(0);
  auto s1 = seqs_for(1);
  for (const auto& a : s0) {
    for (const auto& b : s1) {
      if (a.empty() && b.empty()) continue;
      check_program_pair(a, b, report);
    }
  }
}

}  // namespace

Report run_interleaving_oracle(int max_ops) {
  Report report;
  max_ops = std::clamp(max_ops, 0, 6);
  if (max_ops == 0) return report;
  int per_rank = std::max(1, max_ops / 2);
  run_unidirectional(per_rank, report);
  run_bidirectional(per_rank, report);
  return report;
}

}  // namespace streamix::oracle
