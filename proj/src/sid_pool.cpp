#include "rpmac/sid_pool.hpp"

#include <string>

#include "rpmac/error.hpp"

namespace rpmac {

SidPool::SidPool(Sid lo, Sid hi) {
  if (lo == 0 || lo > hi) {
    throw Error(Errc::invalid_range, "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  ranges_.push_back({lo, hi});
}

SidPool SidPool::from_ranges(const std::vector<SidRange>& ranges) {
  SidPool pool;
  for (const auto& r : ranges) {
    if (r.lo == 0 || r.lo > r.hi) throw Error(Errc::invalid_range, "range bounds");
    if (!pool.ranges_.empty() && pool.ranges_.back().hi + 1 >= r.lo) {
      throw Error(Errc::invalid_range, "ranges must ascend without touching");
    }
    pool.ranges_.push_back(r);
  }
  return pool;
}

Sid SidPool::allocate() {
  if (ranges_.empty()) throw Error(Errc::pool_exhausted, "no free SID");
  auto& head = ranges_.front();
  const Sid sid = head.lo;
  if (head.lo == head.hi) {
    ranges_.pop_front();
  } else {
    ++head.lo;
  }
  return sid;
}

void SidPool::release(Sid sid) {
  if (sid == 0) throw Error(Errc::invalid_range, "SID 0 belongs to the CCO");
  auto it = ranges_.begin();
  while (it != ranges_.end() && it->hi < sid) ++it;
  if (it != ranges_.end() && it->lo <= sid) {
    throw Error(Errc::double_release, "SID " + std::to_string(sid) + " is already free");
  }

  const bool joins_next = it != ranges_.end() && it->lo == sid + 1;
  auto prev = it == ranges_.begin() ? ranges_.end() : std::prev(it);
  const bool joins_prev = prev != ranges_.end() && prev->hi + 1 == sid;

  if (joins_prev && joins_next) {
    prev->hi = it->hi;
    ranges_.erase(it);
  } else if (joins_prev) {
    prev->hi = sid;
  } else if (joins_next) {
    it->lo = sid;
  } else {
    ranges_.insert(it, SidRange{sid, sid});
  }
}

bool SidPool::contains(Sid sid) const {
  for (const auto& r : ranges_) {
    if (sid < r.lo) return false;
    if (sid <= r.hi) return true;
  }
  return false;
}

std::size_t SidPool::free_count() const {
  std::size_t n = 0;
  for (const auto& r : ranges_) n += static_cast<std::size_t>(r.hi - r.lo) + 1;
  return n;
}

}  // namespace rpmac
