#include "streamix/world.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace streamix {

namespace {
int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return fallback;
  return std::atoi(v);
}
}  // namespace

FabricConfig FabricConfig::from_env() {
  FabricConfig cfg;
  cfg.implicit_pool_size = env_int("STREAMIX_IMPLICIT_VCIS", cfg.implicit_pool_size);
  cfg.explicit_pool_size = env_int("STREAMIX_EXPLICIT_VCIS", cfg.explicit_pool_size);
  const char* ex = std::getenv("STREAMIX_EXCLUSION");
  if (ex != nullptr) {
    std::string s(ex);
    if (s == "global")
      cfg.exclusion_mode = Exclusion::global;
    else if (s == "per_endpoint")
      cfg.exclusion_mode = Exclusion::per_endpoint;
    else if (!s.empty())
      throw std::invalid_argument("STREAMIX_EXCLUSION must be global or per_endpoint");
  }
  return cfg;
}

World::World(int n_ranks, const FabricConfig& cfg) : cfg_(cfg) {
  if (n_ranks < 1) throw std::invalid_argument("world needs at least one rank");
  procs_.reserve(n_ranks);
  for (int r = 0; r < n_ranks; ++r)
    procs_.emplace_back(new Proc(this, r, n_ranks, cfg));
  for (auto& p : procs_) p->build_world_comm();
}

uint32_t World::alloc_ctx() {
  std::lock_guard<std::mutex> lk(ctx_mu_);
  if (!retired_ctx_.empty()) {
    uint32_t c = retired_ctx_.top();
    retired_ctx_.pop();
    return c;
  }
  return next_ctx_++;
}

void World::retire_ctx(uint32_t ctx) {
  std::lock_guard<std::mutex> lk(ctx_mu_);
  retired_ctx_.push(ctx);
}

Proc::Proc(World* w, int rank, int n_ranks, const FabricConfig& cfg)
    : world_(w), rank_(rank), fabric_(rank, n_ranks, cfg) {}

void Proc::build_world_comm() {
  auto c = std::make_unique<CommState>();
  c->ctx = 0;
  c->n_ranks = world_->size();
  c->rank = rank_;
  c->counts.assign(c->n_ranks, 1);
  const auto policy = fabric_.config().implicit_policy;
  int recv_ep = fabric_.select_implicit_endpoint(policy, 0, Role::receiver);
  int send_ep = fabric_.select_implicit_endpoint(policy, 0, Role::sender);
  c->table.assign(c->n_ranks, {recv_ep});
  c->send_eps = {&fabric_.endpoint(send_ep)};
  c->recv_eps = {&fabric_.endpoint(recv_ep)};
  c->seq_p2p = {0};
  world_comm_ = c.get();
  comms_[0] = std::move(c);
}

void run_ranks(World& w, const std::function<void(Proc&)>& fn) {
  std::vector<std::thread> threads;
  threads.reserve(w.size());
  for (int r = 0; r < w.size(); ++r)
    threads.emplace_back([&w, &fn, r] { fn(w.proc(r)); });
  for (auto& t : threads) t.join();
}

}  // namespace streamix
