#include <doctest.h>

#include <set>

#include "rpmac/error.hpp"
#include "rpmac/random.hpp"
#include "rpmac/sid_pool.hpp"

using namespace rpmac;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::config_parse;
}

// Canonical ranges of a set: maximal runs of consecutive values.
std::vector<SidRange> runs_of(const std::set<int>& free) {
  std::vector<SidRange> out;
  for (int v : free) {
    if (!out.empty() && out.back().hi + 1 == v) {
      out.back().hi = static_cast<Sid>(v);
    } else {
      out.push_back({static_cast<Sid>(v), static_cast<Sid>(v)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("allocation takes the smallest free SID") {
  SidPool pool(1, 255);
  CHECK(pool.allocate() == 1);
  CHECK(pool.allocate() == 2);
  CHECK(pool.ranges() == std::vector<SidRange>{{3, 255}});
  pool.release(1);
  CHECK(pool.ranges() == std::vector<SidRange>{{1, 1}, {3, 255}});
  CHECK(pool.allocate() == 1);
}

TEST_CASE("release merges with both neighbours") {
  auto pool = SidPool::from_ranges({{1, 4}, {6, 10}});
  pool.release(5);
  CHECK(pool.ranges() == std::vector<SidRange>{{1, 10}});
  CHECK(pool.free_count() == 10);
}

TEST_CASE("release extends a range at either edge") {
  auto pool = SidPool::from_ranges({{5, 7}});
  pool.release(4);
  pool.release(8);
  CHECK(pool.ranges() == std::vector<SidRange>{{4, 8}});
  pool.release(1);
  CHECK(pool.ranges() == std::vector<SidRange>{{1, 1}, {4, 8}});
}

TEST_CASE("errors") {
  CHECK(error_of([] { SidPool(5, 4); }) == Errc::invalid_range);
  CHECK(error_of([] { SidPool(0, 4); }) == Errc::invalid_range);
  SidPool one(9, 9);
  CHECK(one.allocate() == 9);
  CHECK(one.empty());
  CHECK(error_of([&] { one.allocate(); }) == Errc::pool_exhausted);
  one.release(9);
  CHECK(error_of([&] { one.release(9); }) == Errc::double_release);
  CHECK_THROWS_AS(SidPool::from_ranges({{5, 7}, {8, 9}}), Error);
  CHECK_THROWS_AS(SidPool::from_ranges({{5, 7}, {2, 3}}), Error);
}

TEST_CASE("matches a set oracle under random operations") {
  Rng rng(2024);
  SidPool pool(1, 255);
  std::set<int> free;
  for (int v = 1; v <= 255; ++v) free.insert(v);
  for (int step = 0; step < 20000; ++step) {
    if (free.empty() || (free.size() < 255 && rng.bernoulli(0.45))) {
      const auto used = static_cast<int>(rng.uniform_int(1, 255));
      if (free.count(used)) {
        CHECK_THROWS_AS(pool.release(static_cast<Sid>(used)), Error);
      } else {
        pool.release(static_cast<Sid>(used));
        free.insert(used);
      }
    } else {
      const Sid got = pool.allocate();
      REQUIRE(got == *free.begin());
      free.erase(free.begin());
    }
    REQUIRE(pool.ranges() == runs_of(free));
    REQUIRE(pool.free_count() == free.size());
  }
}

TEST_CASE("drain and restore leaves one range") {
  Rng rng(5);
  SidPool pool(1, 255);
  std::vector<Sid> out;
  while (!pool.empty()) out.push_back(pool.allocate());
  CHECK(out.size() == 255);
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.uniform_int(0, i - 1)]);
  for (Sid s : out) pool.release(s);
  CHECK(pool.ranges() == std::vector<SidRange>{{1, 255}});
}
