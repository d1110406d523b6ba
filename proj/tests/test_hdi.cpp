#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <vector>

#include "equibin/fit.hpp"
#include "equibin/rng.hpp"

using namespace equibin;

namespace {

// brute-force oracle: enumerate every window over the sorted samples
Interval hdi_brute(std::vector<double> x, double mass) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const std::size_t m =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(mass * n)));
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + m <= n; ++i) {
    const double w = x[i + m - 1] - x[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return Interval{x[best], x[best + m - 1], mass};
}

}  // namespace

TEST_CASE("hdi of a point mass collapses to the point") {
  std::vector<double> x(200, 4.25);
  const Interval h = hdi(x, 0.95);
  CHECK(h.lo == 4.25);
  CHECK(h.hi == 4.25);
}

TEST_CASE("hdi over 1..100 picks the earliest shortest window") {
  std::vector<double> x(100);
  for (int i = 0; i < 100; ++i) x[i] = i + 1.0;
  const Interval h = hdi(x, 0.95);
  CHECK(h.lo == 1.0);
  CHECK(h.hi == 95.0);
  CHECK(h.hi - h.lo == 94.0);
}

TEST_CASE("hdi rejects bad input") {
  std::vector<double> x(99, 1.0);
  CHECK_THROWS(hdi(x, 0.95));
  x.resize(200, 1.0);
  CHECK_THROWS(hdi(x, 0.0));
  CHECK_THROWS(hdi(x, 1.0));
}

TEST_CASE("hdi matches the brute-force oracle on random data") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 100 + rng.below(400);
    std::vector<double> x(n);
    for (auto& v : x) {
      // mixed-shape draws: lumps plus tails
      v = (rng.uniform() < 0.3) ? 5.0 + 0.1 * rng.normal() : 3.0 * rng.normal();
    }
    const double mass = 0.5 + 0.45 * rng.uniform();
    const Interval got = hdi(x, mass);
    const Interval want = hdi_brute(x, mass);
    CHECK(got.lo == want.lo);
    CHECK(got.hi == want.hi);
  }
}

TEST_CASE("hdi endpoints of heavy standard-normal sampling sit near +-1.96") {
  Rng rng(5150);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.normal();
  const Interval h = hdi(x, 0.95);
  CHECK(std::abs(h.lo + 1.96) < 0.05);
  CHECK(std::abs(h.hi - 1.96) < 0.05);
}
