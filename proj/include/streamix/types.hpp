#pragma once

#include <cstddef>
#include <cstdint>

namespace streamix {

// Wildcards accepted by receive patterns. ANY_* never appear on the wire.
constexpr int ANY_SOURCE = -1;
constexpr int ANY_TAG = -1;
constexpr int ANY_INDEX = -1;

// Wire value for "no stream index" (single-stream and legacy communicators).
constexpr int IDX_NONE = -2;

// Distinguished null stream handle. Operations on it route through the
// implicit endpoint pool like legacy traffic.
constexpr int STREAM_NULL = 0;

// Upper bound on the per-process endpoint pool (implicit + explicit).
#ifndef STREAMIX_MAX_POOL
#define STREAMIX_MAX_POOL 64
#endif
constexpr int MAX_POOL_SIZE = STREAMIX_MAX_POOL;

/// Fixed-size elementary element types; the enum value is the byte width.
enum class Elem : int {
  byte = 1,
  i32 = 4,
  f64 = 8,
};

constexpr size_t elem_size(Elem e) { return static_cast<size_t>(e); }

enum class Exclusion {
  global,        // one process-wide critical section
  per_endpoint,  // one critical section per endpoint
  none,          // caller promises strict serialization (exclusive streams)
};

enum class ImplicitPolicy {
  one_to_one,               // sender and receiver hash to the same endpoint id
  sender_any_recv_default,  // sender rotates, receiver always uses endpoint 0
};

enum class PoolClass { implicit, explicit_ };

enum class AcquireMode { exclusive, shared };

enum class Role { sender, receiver };

struct FabricConfig {
  int implicit_pool_size = 1;
  int explicit_pool_size = 0;
  Exclusion exclusion_mode = Exclusion::per_endpoint;  // global or per_endpoint
  ImplicitPolicy implicit_policy = ImplicitPolicy::one_to_one;

  /// Defaults seeded from STREAMIX_IMPLICIT_VCIS, STREAMIX_EXPLICIT_VCIS and
  /// STREAMIX_EXCLUSION. Fields set by the caller afterwards win over env.
  static FabricConfig from_env();
};

}  // namespace streamix
