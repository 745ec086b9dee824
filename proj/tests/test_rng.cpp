#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "seqshift/rng.hpp"

using namespace seqshift;

TEST_CASE("identical keys give identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive separates purposes and indices") {
  const std::uint64_t k = 7;
  std::set<std::uint64_t> keys;
  keys.insert(Rng::derive(k, "draw"));
  keys.insert(Rng::derive(k, "split"));
  keys.insert(Rng::derive(k, "draw", 0));
  keys.insert(Rng::derive(k, "draw", 1));
  keys.insert(Rng::derive(k, "draw", 0, 1));
  keys.insert(Rng::derive(k, "draw", 1, 0));
  CHECK(keys.size() == 6);
}

TEST_CASE("next_below stays in range and covers it") {
  Rng rng(123);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.next_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("next_real is in [0,1) and roughly uniform") {
  Rng rng(5);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.next_real();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("shuffle is deterministic per key") {
  std::vector<int> a(50), b(50);
  for (int i = 0; i < 50; ++i) a[i] = b[i] = i;
  Rng ra(9), rb(9);
  ra.shuffle(a);
  rb.shuffle(b);
  CHECK(a == b);
  CHECK(a != std::vector<int>{});
}
