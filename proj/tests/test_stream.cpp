#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "streamix/world.hpp"

using namespace streamix;

namespace {
FabricConfig cfg(int implicit, int explicit_) {
  FabricConfig c;
  c.implicit_pool_size = implicit;
  c.explicit_pool_size = explicit_;
  return c;
}
}  // namespace

TEST_CASE("default creation takes exclusive endpoints until the pool runs out") {
  World w(1, cfg(1, 2));
  Proc& p = w.proc(0);
  auto a = p.stream_create();
  auto b = p.stream_create();
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  auto c = p.stream_create();
  REQUIRE(!c.ok());
  CHECK(c.error() == Err::pool_exhausted);
}

TEST_CASE("no explicit pool -> stream creation fails") {
  World w(1, cfg(1, 0));
  auto r = w.proc(0).stream_create();
  REQUIRE(!r.ok());
  CHECK(r.error() == Err::no_explicit_pool);
}

TEST_CASE("exclusive stream endpoints run the lock-free regime") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);
  auto s = p.stream_create();
  REQUIRE(s.ok());
  Stream* st = p.stream_get(*s);
  REQUIRE(st != nullptr);
  CHECK(st->kind == Stream::Kind::serial_context);
  CHECK(st->exclusive);
  CHECK(st->endpoint->exclusion() == Exclusion::none);
  REQUIRE(p.stream_free(*s).ok());
  // Release restores the configured regime.
  CHECK(w.proc(0).fabric().endpoint(1).exclusion() == Exclusion::per_endpoint);
}

TEST_CASE("exec_queue hint wraps a live queue on a shared endpoint") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);
  ExecQueue* q = exec_queue_create();

  Info info;
  info.set("type", "exec_queue");
  info.set_hex("value", &q, sizeof(q));
  auto s = p.stream_create(info);
  REQUIRE(s.ok());
  Stream* st = p.stream_get(*s);
  REQUIRE(st != nullptr);
  CHECK(st->kind == Stream::Kind::exec_queue);
  CHECK(st->queue == q);
  CHECK(!st->exclusive);
  CHECK(st->endpoint->exclusion() == Exclusion::per_endpoint);

  CHECK(p.stream_free(*s).ok());
  CHECK(exec_queue_destroy(q).ok());
}

TEST_CASE("bad hints are rejected") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);

  Info unknown_type;
  unknown_type.set("type", "warp_drive");
  CHECK(p.stream_create(unknown_type).error() == Err::bad_hint);

  Info missing_value;
  missing_value.set("type", "exec_queue");
  CHECK(p.stream_create(missing_value).error() == Err::bad_hint);

  Info bad_hex;
  bad_hex.set("type", "exec_queue");
  bad_hex.set("value", "zz");
  CHECK(p.stream_create(bad_hex).error() == Err::bad_hint);

  Info wrong_len;
  wrong_len.set("type", "exec_queue");
  wrong_len.set("value", "abcd");
  CHECK(p.stream_create(wrong_len).error() == Err::bad_hint);

  ExecQueue* q = exec_queue_create();
  REQUIRE(exec_queue_destroy(q).ok());
  Info dead_queue;
  dead_queue.set("type", "exec_queue");
  dead_queue.set_hex("value", &q, sizeof(q));
  CHECK(p.stream_create(dead_queue).error() == Err::bad_hint);

  Info bad_policy;
  bad_policy.set("endpoint_policy", "sometimes");
  CHECK(p.stream_create(bad_policy).error() == Err::bad_hint);
}

TEST_CASE("shared endpoint policy round-robins over a one-slot pool") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);
  Info info;
  info.set("endpoint_policy", "shared");
  int ids[3];
  for (int& id : ids) {
    auto s = p.stream_create(info);
    REQUIRE(s.ok());
    id = *s;
  }
  for (int id : ids) {
    Stream* st = p.stream_get(id);
    REQUIRE(st != nullptr);
    CHECK(st->endpoint->pool_slot() == 0);
  }
  for (int id : ids) CHECK(p.stream_free(id).ok());
}

TEST_CASE("create then free leaves the endpoint reusable") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);
  auto a = p.stream_create();
  REQUIRE(a.ok());
  Endpoint* first_ep = p.stream_get(*a)->endpoint;
  REQUIRE(p.stream_free(*a).ok());
  auto b = p.stream_create();
  REQUIRE(b.ok());
  CHECK(p.stream_get(*b)->endpoint == first_ep);
}

TEST_CASE("freeing STREAM_NULL or an unknown id -> INVALID_STREAM") {
  World w(1, cfg(1, 1));
  CHECK(w.proc(0).stream_free(STREAM_NULL).error() == Err::invalid_stream);
  CHECK(w.proc(0).stream_free(12345).error() == Err::invalid_stream);
  auto s = w.proc(0).stream_create();
  REQUIRE(s.ok());
  REQUIRE(w.proc(0).stream_free(*s).ok());
  CHECK(w.proc(0).stream_free(*s).error() == Err::invalid_stream);  // double free
}

TEST_CASE("a stream referenced by a communicator cannot be freed") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);
  auto s = p.stream_create();
  REQUIRE(s.ok());
  auto comm = p.stream_comm_create(p.world_comm(), *s);
  REQUIRE(comm.ok());

  auto f = p.stream_free(*s);
  REQUIRE(!f.ok());
  CHECK(f.error() == Err::in_use);

  REQUIRE(p.comm_free(*comm).ok());
  CHECK(p.stream_free(*s).ok());
}

TEST_CASE("stream_free propagates PENDING_OPS from its endpoint") {
  World w(1, cfg(1, 1));
  Proc& p = w.proc(0);
  auto s = p.stream_create();
  REQUIRE(s.ok());
  Endpoint* ep = p.stream_get(*s)->endpoint;

  uint8_t buf[4];
  RecvDesc d;
  d.pattern.wire_context = 2;  // some context; never matched
  d.pattern.source = ANY_SOURCE;
  d.pattern.tag = ANY_TAG;
  d.pattern.src_idx = IDX_NONE;
  d.pattern.dst_idx = IDX_NONE;
  d.buf = buf;
  d.capacity = sizeof buf;
  d.request = std::make_shared<Request>();
  ep->post_receive(d);

  auto f = p.stream_free(*s);
  REQUIRE(!f.ok());
  CHECK(f.error() == Err::pending_ops);

  Envelope env;
  env.context_id = 2;
  env.payload_len = 0;
  env.src_idx = IDX_NONE;
  env.dst_idx = IDX_NONE;
  CHECK(ep->route_and_match(env, nullptr) == MatchOutcome::matched);
  CHECK(p.stream_free(*s).ok());
}

TEST_CASE("any create/free order of N <= 4 streams leaves the pool reusable") {
  constexpr int kN = 4;
  std::vector<int> order(kN);
  std::iota(order.begin(), order.end(), 0);
  do {
    World w(1, cfg(1, kN));
    Proc& p = w.proc(0);
    std::vector<int> ids(kN);
    for (int i = 0; i < kN; ++i) {
      auto s = p.stream_create();
      REQUIRE(s.ok());
      ids[i] = *s;
    }
    for (int i : order) REQUIRE(p.stream_free(ids[i]).ok());
    // No leaked endpoints: the whole pool is acquirable again.
    for (int i = 0; i < kN; ++i) REQUIRE(p.stream_create().ok());
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("fabric config env seeding: config set afterwards wins") {
  setenv("STREAMIX_IMPLICIT_VCIS", "3", 1);
  setenv("STREAMIX_EXPLICIT_VCIS", "5", 1);
  setenv("STREAMIX_EXCLUSION", "global", 1);
  FabricConfig c = FabricConfig::from_env();
  CHECK(c.implicit_pool_size == 3);
  CHECK(c.explicit_pool_size == 5);
  CHECK(c.exclusion_mode == Exclusion::global);
  c.explicit_pool_size = 7;  // explicit config beats env
  World w(1, c);
  CHECK(w.proc(0).fabric().total_endpoints() == 10);
  unsetenv("STREAMIX_IMPLICIT_VCIS");
  unsetenv("STREAMIX_EXPLICIT_VCIS");
  unsetenv("STREAMIX_EXCLUSION");
}
