#include "streamix/endpoint.hpp"

#include <algorithm>
#include <cstring>

namespace streamix {

namespace {
bool same_identity(const Envelope& a, const Envelope& b) {
  return a.context_id == b.context_id && a.src_rank == b.src_rank &&
         a.src_idx == b.src_idx;
}
}  // namespace

void Endpoint::deliver(const Envelope& env, const uint8_t* payload,
                       const RecvDesc& desc) {
  size_t n = std::min(static_cast<size_t>(env.payload_len), desc.capacity);
  if (n > 0) std::memcpy(desc.buf, payload, n);
  Request& r = *desc.request;
  r.status.source = static_cast<int>(env.src_rank);
  r.status.tag = env.tag;
  r.status.source_index = env.src_idx;
  r.status.bytes = n;
  r.status.truncated = env.payload_len > desc.capacity;
  r.mark_complete();
  ++delivered_;
}

MatchOutcome Endpoint::route_and_match(const Envelope& env,
                                       const uint8_t* payload) {
  for (auto it = posted_.begin(); it != posted_.end(); ++it) {
    if (it->pattern.accepts(env)) {
      RecvDesc desc = std::move(*it);
      posted_.erase(it);
      deliver(env, payload, desc);
      return MatchOutcome::matched;
    }
  }
  UnexpectedMsg m;
  m.env = env;
  m.payload.assign(payload, payload + env.payload_len);
  unexpected_.push_back(std::move(m));
  return MatchOutcome::stored_unexpected;
}

void Endpoint::post_receive(RecvDesc desc) {
  auto first = unexpected_.end();
  for (auto it = unexpected_.begin(); it != unexpected_.end(); ++it) {
    if (desc.pattern.accepts(it->env)) {
      first = it;
      break;
    }
  }
  if (first == unexpected_.end()) {
    posted_.push_back(std::move(desc));
    return;
  }
  // Seq tie-break within the first match's identity.
  auto best = first;
  for (auto it = std::next(first); it != unexpected_.end(); ++it) {
    if (desc.pattern.accepts(it->env) && same_identity(it->env, first->env) &&
        it->env.seq < best->env.seq) {
      best = it;
    }
  }
  UnexpectedMsg m = std::move(*best);
  unexpected_.erase(best);
  deliver(m.env, m.payload.data(), desc);
}

}  // namespace streamix
