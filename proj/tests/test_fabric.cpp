#include <doctest.h>

#include <atomic>
#include <thread>

#include "streamix/world.hpp"

using namespace streamix;

namespace {

FabricConfig cfg(int implicit, int explicit_, Exclusion ex = Exclusion::per_endpoint,
                 ImplicitPolicy pol = ImplicitPolicy::one_to_one) {
  FabricConfig c;
  c.implicit_pool_size = implicit;
  c.explicit_pool_size = explicit_;
  c.exclusion_mode = ex;
  c.implicit_policy = pol;
  return c;
}

RecvDesc make_recv(uint32_t wire_context, int source, int tag, uint8_t* buf,
                   size_t cap, Req* out_req) {
  RecvDesc d;
  d.pattern.wire_context = wire_context;
  d.pattern.source = source;
  d.pattern.tag = tag;
  d.pattern.src_idx = IDX_NONE;
  d.pattern.dst_idx = IDX_NONE;
  d.buf = buf;
  d.capacity = cap;
  d.request = std::make_shared<Request>();
  *out_req = d.request;
  return d;
}

Envelope make_env(uint32_t ctx, int src_rank, int tag, uint64_t seq,
                  uint64_t len) {
  Envelope e;
  e.context_id = ctx;
  e.src_rank = static_cast<uint32_t>(src_rank);
  e.src_idx = IDX_NONE;
  e.dst_idx = IDX_NONE;
  e.tag = tag;
  e.seq = seq;
  e.payload_len = len;
  return e;
}

}  // namespace

TEST_CASE("exclusive acquire hands out fresh slots, then POOL_EXHAUSTED") {
  World w(1, cfg(1, 2));
  Fabric& f = w.proc(0).fabric();
  auto a = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  auto b = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK((*a)->pool_slot() == 0);
  CHECK((*b)->pool_slot() == 1);
  auto c = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(!c.ok());
  CHECK(c.error() == Err::pool_exhausted);
}

TEST_CASE("empty explicit pool -> NO_EXPLICIT_POOL") {
  World w(1, cfg(1, 0));
  auto r = w.proc(0).fabric().endpoint_acquire(PoolClass::explicit_,
                                               AcquireMode::exclusive);
  REQUIRE(!r.ok());
  CHECK(r.error() == Err::no_explicit_pool);
}

TEST_CASE("shared acquire round-robins over the explicit pool") {
  World w(1, cfg(1, 2));
  Fabric& f = w.proc(0).fabric();
  int slots[4];
  for (int& s : slots) {
    auto r = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::shared);
    REQUIRE(r.ok());
    s = (*r)->pool_slot();
  }
  CHECK(slots[0] == 0);
  CHECK(slots[1] == 1);
  CHECK(slots[2] == 0);
  CHECK(slots[3] == 1);
}

TEST_CASE("shared rotation skips exclusively held endpoints") {
  World w(1, cfg(1, 2));
  Fabric& f = w.proc(0).fabric();
  auto excl = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(excl.ok());
  REQUIRE((*excl)->pool_slot() == 0);
  for (int i = 0; i < 3; ++i) {
    auto r = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::shared);
    REQUIRE(r.ok());
    CHECK((*r)->pool_slot() == 1);
  }
  auto excl2 = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(!excl2.ok());  // slot 1 carries shared refs, slot 0 is held
  CHECK(excl2.error() == Err::pool_exhausted);
}

TEST_CASE("all endpoints exclusively held -> shared acquire fails") {
  World w(1, cfg(1, 1));
  Fabric& f = w.proc(0).fabric();
  REQUIRE(f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive).ok());
  auto r = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::shared);
  REQUIRE(!r.ok());
  CHECK(r.error() == Err::pool_exhausted);
}

TEST_CASE("implicit endpoints cannot be exclusively owned") {
  World w(1, cfg(2, 0));
  auto r = w.proc(0).fabric().endpoint_acquire(PoolClass::implicit,
                                               AcquireMode::exclusive);
  REQUIRE(!r.ok());
  CHECK(r.error() == Err::config_invalid);
  auto s = w.proc(0).fabric().endpoint_acquire(PoolClass::implicit,
                                               AcquireMode::shared);
  REQUIRE(s.ok());
  CHECK((*s)->pool_slot() == 0);
}

TEST_CASE("release returns exclusive endpoints to the allocatable set") {
  World w(1, cfg(1, 1));
  Fabric& f = w.proc(0).fabric();
  auto a = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(a.ok());
  REQUIRE(f.endpoint_release(*a).ok());
  auto b = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(b.ok());
  CHECK((*b)->pool_slot() == 0);
}

TEST_CASE("release with an unmatched posted receive -> PENDING_OPS") {
  World w(1, cfg(1, 1));
  Fabric& f = w.proc(0).fabric();
  auto a = f.endpoint_acquire(PoolClass::explicit_, AcquireMode::exclusive);
  REQUIRE(a.ok());
  Endpoint& ep = **a;

  uint8_t buf[8];
  Req req;
  ep.post_receive(make_recv(0, ANY_SOURCE, ANY_TAG, buf, sizeof buf, &req));
  auto rel = f.endpoint_release(&ep);
  REQUIRE(!rel.ok());
  CHECK(rel.error() == Err::pending_ops);

  // Drive the receive to completion, then release succeeds.
  uint8_t payload[4] = {1, 2, 3, 4};
  CHECK(ep.route_and_match(make_env(0, 0, 5, 1, 4), payload) ==
        MatchOutcome::matched);
  CHECK(req->complete());
  CHECK(f.endpoint_release(&ep).ok());
}

TEST_CASE("one_to_one selection hashes the context id for both roles") {
  World w(1, cfg(4, 0));
  Fabric& f = w.proc(0).fabric();
  CHECK(f.select_implicit_endpoint(ImplicitPolicy::one_to_one, 6, Role::sender) == 2);
  CHECK(f.select_implicit_endpoint(ImplicitPolicy::one_to_one, 6, Role::receiver) == 2);
  for (uint32_t ctx = 0; ctx < 8; ++ctx) {
    int s = f.select_implicit_endpoint(ImplicitPolicy::one_to_one, ctx, Role::sender);
    int r = f.select_implicit_endpoint(ImplicitPolicy::one_to_one, ctx, Role::receiver);
    CHECK(s == r);
    CHECK(s == static_cast<int>(ctx % 4));
  }
}

TEST_CASE("sender_any_recv_default pins receivers to endpoint 0") {
  World w(1, cfg(4, 0, Exclusion::per_endpoint, ImplicitPolicy::sender_any_recv_default));
  Fabric& f = w.proc(0).fabric();
  for (uint32_t ctx = 0; ctx < 10; ++ctx)
    CHECK(f.select_implicit_endpoint(ImplicitPolicy::sender_any_recv_default,
                                     ctx, Role::receiver) == 0);
  // Senders rotate over the whole implicit pool.
  bool seen[4] = {};
  for (int i = 0; i < 4; ++i) {
    int s = f.select_implicit_endpoint(ImplicitPolicy::sender_any_recv_default,
                                       0, Role::sender);
    REQUIRE(s >= 0);
    REQUIRE(s < 4);
    seen[s] = true;
  }
  CHECK((seen[0] && seen[1] && seen[2] && seen[3]));
}

TEST_CASE("unexpected messages match receives in arrival (seq) order") {
  World w(1, cfg(1, 1));
  Endpoint& ep = w.proc(0).fabric().endpoint(1);

  uint8_t pay1[8] = {1};
  uint8_t pay2[8] = {2};
  CHECK(ep.route_and_match(make_env(0, 0, 3, 1, 8), pay1) ==
        MatchOutcome::stored_unexpected);
  CHECK(ep.route_and_match(make_env(0, 0, 3, 2, 8), pay2) ==
        MatchOutcome::stored_unexpected);
  CHECK(ep.unexpected_count() == 2);

  uint8_t b1[8], b2[8];
  Req r1, r2;
  ep.post_receive(make_recv(0, 0, 3, b1, 8, &r1));
  ep.post_receive(make_recv(0, 0, 3, b2, 8, &r2));
  REQUIRE(r1->complete());
  REQUIRE(r2->complete());
  CHECK(b1[0] == 1);
  CHECK(b2[0] == 2);
  CHECK(ep.unexpected_count() == 0);
}

TEST_CASE("a posted receive is never also stored unexpected") {
  World w(1, cfg(1, 1));
  Endpoint& ep = w.proc(0).fabric().endpoint(1);
  uint8_t buf[8];
  Req req;
  ep.post_receive(make_recv(0, ANY_SOURCE, 7, buf, 8, &req));
  uint8_t pay[2] = {9, 9};
  CHECK(ep.route_and_match(make_env(0, 0, 7, 1, 2), pay) ==
        MatchOutcome::matched);
  CHECK(ep.posted_count() == 0);
  CHECK(ep.unexpected_count() == 0);
  CHECK(req->status.tag == 7);
  CHECK(req->status.source == 0);
  CHECK(req->status.bytes == 2);
}

TEST_CASE("wildcard receive reports the concrete envelope tag") {
  World w(1, cfg(1, 1));
  Endpoint& ep = w.proc(0).fabric().endpoint(1);
  uint8_t buf[4];
  Req req;
  ep.post_receive(make_recv(0, ANY_SOURCE, ANY_TAG, buf, 4, &req));
  uint8_t pay[1] = {0x5a};
  ep.route_and_match(make_env(0, 0, 7, 1, 1), pay);
  REQUIRE(req->complete());
  CHECK(req->status.tag == 7);
}

TEST_CASE("truncation is recorded in the status, not an error") {
  World w(1, cfg(1, 1));
  Endpoint& ep = w.proc(0).fabric().endpoint(1);
  uint8_t buf[2] = {};
  Req req;
  ep.post_receive(make_recv(0, ANY_SOURCE, ANY_TAG, buf, 2, &req));
  uint8_t pay[4] = {1, 2, 3, 4};
  ep.route_and_match(make_env(0, 0, 0, 1, 4), pay);
  REQUIRE(req->complete());
  CHECK(req->status.truncated);
  CHECK(req->status.bytes == 2);
  CHECK(buf[0] == 1);
  CHECK(buf[1] == 2);
}

TEST_CASE("idle progress poll returns 0") {
  World w(2, cfg(1, 1));
  Fabric& f = w.proc(0).fabric();
  CHECK(f.progress_poll(f.endpoint(0)) == 0);
  CHECK(f.progress_poll(f.endpoint(1)) == 0);
}

TEST_CASE("progress drains an in-flight message and completes the receive") {
  World w(2, cfg(1, 1));
  Fabric& f1 = w.proc(1).fabric();
  Endpoint& dst = f1.endpoint(0);

  uint8_t buf[8] = {};
  Req req;
  dst.post_receive(make_recv(0, 0, 4, buf, 8, &req));

  Envelope env = make_env(0, 0, 4, 1, 3);
  uint8_t pay[3] = {7, 8, 9};
  dst.inbound(0, 0).push(env, pay);

  CHECK(f1.progress_poll(dst) >= 1);
  REQUIRE(req->complete());
  CHECK(buf[0] == 7);
  CHECK(f1.progress_poll(dst) == 0);
}

TEST_CASE("progress on one endpoint never touches another") {
  World w(2, cfg(1, 2));
  Fabric& f1 = w.proc(1).fabric();
  Endpoint& a = f1.endpoint(1);
  Endpoint& b = f1.endpoint(2);

  uint8_t buf[8] = {};
  Req req;
  b.post_receive(make_recv(0, 0, 0, buf, 8, &req));
  uint8_t pay[1] = {1};
  b.inbound(0, 0).push(make_env(0, 0, 0, 1, 1), pay);

  // Polling A leaves B's pending traffic untouched.
  CHECK(f1.progress_poll(a) == 0);
  CHECK(!req->complete());
  CHECK(b.posted_count() == 1);

  CHECK(f1.progress_poll(b) == 1);
  CHECK(req->complete());
}

TEST_CASE("concurrent agents on distinct endpoints conserve every message") {
  constexpr int kEndpoints = 4;
  constexpr int kMsgs = 500;
  World w(2, cfg(kEndpoints, 0, Exclusion::per_endpoint));
  Fabric& recv_fab = w.proc(1).fabric();

  std::atomic<long> delivered{0};
  std::vector<std::thread> agents;
  for (int e = 0; e < kEndpoints; ++e) {
    agents.emplace_back([&, e] {
      Endpoint& ep = recv_fab.endpoint(e);
      std::vector<std::array<uint8_t, 8>> bufs(kMsgs);
      std::vector<Req> reqs(kMsgs);
      for (int i = 0; i < kMsgs; ++i) {
        RecvDesc d;
        d.pattern.wire_context = 0;
        d.pattern.source = 0;
        d.pattern.tag = e;
        d.pattern.src_idx = IDX_NONE;
        d.pattern.dst_idx = IDX_NONE;
        d.buf = bufs[i].data();
        d.capacity = 8;
        d.request = std::make_shared<Request>();
        reqs[i] = d.request;
        {
          EndpointGuard g(recv_fab.global_mutex(), ep);
          ep.post_receive(std::move(d));
        }
      }
      for (int i = 0; i < kMsgs; ++i) {
        uint64_t v = static_cast<uint64_t>(e) << 32 | i;
        ep.inbound(0, e).push(make_env(0, 0, e, i + 1, 8), &v);
      }
      long done = 0;
      while (done < kMsgs) {
        recv_fab.progress_poll(ep);
        done = 0;
        for (auto& r : reqs)
          if (r->complete()) ++done;
        std::this_thread::yield();
      }
      for (int i = 0; i < kMsgs; ++i) {
        uint64_t v;
        std::memcpy(&v, bufs[i].data(), 8);
        REQUIRE(v == (static_cast<uint64_t>(e) << 32 | i));
      }
      delivered.fetch_add(done);
    });
  }
  for (auto& t : agents) t.join();
  CHECK(delivered.load() == kEndpoints * kMsgs);
  long total_delivered = 0;
  for (int e = 0; e < kEndpoints; ++e) {
    total_delivered += recv_fab.endpoint(e).delivered_count();
    CHECK(recv_fab.endpoint(e).unexpected_count() == 0);
    CHECK(recv_fab.endpoint(e).posted_count() == 0);
  }
  CHECK(total_delivered == kEndpoints * kMsgs);
}
