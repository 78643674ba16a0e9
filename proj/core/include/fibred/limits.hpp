#pragma once

#include <cstddef>
#include <cstdint>

namespace fibred {

/// Bounds on exhaustive search. A quantified check whose tuple count exceeds
/// `enumeration_budget` falls back to `samples` deterministic samples and says so
/// in its report.
struct Limits {
  std::uint64_t enumeration_budget = std::uint64_t{1} << 20;
  std::size_t samples = 256;
  std::uint64_t seed = 0x6b30'5eed;
  unsigned workers = 1;
};

}  // namespace fibred
