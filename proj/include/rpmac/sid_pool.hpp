#pragma once

#include <cstddef>
#include <list>
#include <vector>

#include "rpmac/types.hpp"

namespace rpmac {

struct SidRange {
  Sid lo = 1;
  Sid hi = 1;
  bool operator==(const SidRange&) const = default;
};

/// Free SIDs kept as an ascending list of disjoint, non-touching ranges.
/// allocate() is O(1); release() walks the list, O(M) in the range count.
class SidPool {
 public:
  SidPool() = default;

  /// Single range [lo, hi]. Throws invalid-range when lo > hi or lo == 0.
  SidPool(Sid lo, Sid hi);

  /// Builds a pool from explicit ranges; they must already be canonical.
  static SidPool from_ranges(const std::vector<SidRange>& ranges);

  /// Removes and returns the smallest free SID. Throws pool-exhausted.
  Sid allocate();

  /// Returns `sid` to the pool, merging with neighbours. Throws double-release.
  void release(Sid sid);

  bool contains(Sid sid) const;
  bool empty() const { return ranges_.empty(); }
  std::size_t free_count() const;
  std::vector<SidRange> ranges() const { return {ranges_.begin(), ranges_.end()}; }

 private:
  std::list<SidRange> ranges_;
};

}  // namespace rpmac
