#include "streamix/result.hpp"

namespace streamix {

std::string_view to_string(Err e) {
  switch (e) {
    case Err::ok: return "OK";
    case Err::pool_exhausted: return "POOL_EXHAUSTED";
    case Err::no_explicit_pool: return "NO_EXPLICIT_POOL";
    case Err::pending_ops: return "PENDING_OPS";
    case Err::in_use: return "IN_USE";
    case Err::bad_hint: return "BAD_HINT";
    case Err::invalid_stream: return "INVALID_STREAM";
    case Err::invalid_comm: return "INVALID_COMM";
    case Err::invalid_rank: return "INVALID_RANK";
    case Err::invalid_count: return "INVALID_COUNT";
    case Err::invalid_tag: return "INVALID_TAG";
    case Err::invalid_request: return "INVALID_REQUEST";
    case Err::invalid_index: return "INVALID_INDEX";
    case Err::multiplex_comm: return "MULTIPLEX_COMM";
    case Err::not_multiplex: return "NOT_MULTIPLEX";
    case Err::wildcard_dst: return "WILDCARD_DST";
    case Err::empty_list: return "EMPTY_LIST";
    case Err::not_enqueue_comm: return "NOT_ENQUEUE_COMM";
    case Err::stream_mismatch: return "STREAM_MISMATCH";
    case Err::queue_busy: return "QUEUE_BUSY";
    case Err::config_invalid: return "CONFIG_INVALID";
    case Err::not_found: return "NOT_FOUND";
    case Err::bad_encoding: return "BAD_ENCODING";
  }
  return "UNKNOWN";
}

}  // namespace streamix
