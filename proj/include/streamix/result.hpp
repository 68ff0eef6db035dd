#pragma once

#include <cassert>
#include <string_view>
#include <utility>

namespace streamix {

enum class Err {
  ok = 0,
  pool_exhausted,
  no_explicit_pool,
  pending_ops,
  in_use,
  bad_hint,
  invalid_stream,
  invalid_comm,
  invalid_rank,
  invalid_count,
  invalid_tag,
  invalid_request,
  invalid_index,
  multiplex_comm,
  not_multiplex,
  wildcard_dst,
  empty_list,
  not_enqueue_comm,
  stream_mismatch,
  queue_busy,
  config_invalid,
  not_found,
  bad_encoding,
};

std::string_view to_string(Err e);

/// Value-or-error carrier used by every fallible operation. Holds either a T
/// or an Err; checking ok() before value() is on the caller.
template <typename T>
class Result {
 public:
  Result(T v) : value_(std::move(v)), err_(Err::ok) {}  // NOLINT(google-explicit-constructor)
  Result(Err e) : err_(e) { assert(e != Err::ok); }     // NOLINT(google-explicit-constructor)

  bool ok() const { return err_ == Err::ok; }
  explicit operator bool() const { return ok(); }
  Err error() const { return err_; }

  T& value() {
    assert(ok());
    return value_;
  }
  const T& value() const {
    assert(ok());
    return value_;
  }
  T& operator*() { return value(); }
  const T& operator*() const { return value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  T value_{};
  Err err_;
};

template <>
class Result<void> {
 public:
  Result() : err_(Err::ok) {}
  Result(Err e) : err_(e) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return err_ == Err::ok; }
  explicit operator bool() const { return ok(); }
  Err error() const { return err_; }

  static Result success() { return Result(); }

 private:
  Err err_;
};

}  // namespace streamix
