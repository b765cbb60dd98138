#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "heppo/error.hpp"
#include "heppo/standardization.hpp"
#include "test_util.hpp"

using namespace heppo;
using heppo::testing::two_pass;

namespace {

RunningStats fold(std::span<const double> xs, RunningStats s = {}) {
  for (double x : xs) s = running_update(s, x);
  return s;
}

} // namespace

TEST_CASE("running_update examples") {
  const RunningStats fresh;
  const RunningStats one = running_update(fresh, 5.0);
  CHECK(one.count() == 1);
  CHECK(one.mean() == 5.0);
  CHECK(one.agg() == 0.0);
  CHECK(fresh.count() == 0);  // input unmodified

  const auto s = fold(std::vector<double>{1, 2, 3});
  CHECK(s.mean() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.agg() == doctest::Approx(2.0).epsilon(1e-15));

  for (double c : {-3.25, 0.0, 1e6}) CHECK(fold(std::vector<double>{c, c, c}).agg() == 0.0);

  CHECK_THROWS_AS(running_update(fresh, NAN), ValidationError);
}

TEST_CASE("running_std examples") {
  CHECK(running_std(fold(std::vector<double>{1, 2, 3})) == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(running_std(fold(std::vector<double>{7})) == 0.0);
  CHECK(running_std(fold(std::vector<double>{0, 0, 0, 0})) == 0.0);
  CHECK_THROWS_AS(running_std(RunningStats{}), ValidationError);
}

TEST_CASE("dynamic_standardize examples") {
  auto [s1, z1] = dynamic_standardize({}, std::vector<double>{5});
  CHECK(z1 == std::vector<double>{0.0});
  CHECK(s1.mean() == 5.0);

  const std::vector<double> r{1, 2, 3};
  auto [s, z] = dynamic_standardize({}, r);
  const auto oracle = two_pass(r);
  CHECK(s.mean() == doctest::Approx(oracle.mean).epsilon(1e-12));
  CHECK(running_std(s) == doctest::Approx(oracle.stddev).epsilon(1e-12));
  // Scalar re-implementation: update first, then standardize with final stats.
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(z[i] == doctest::Approx((r[i] - oracle.mean) / oracle.stddev).epsilon(1e-12));
  }

  auto [a, za] = dynamic_standardize({}, std::vector<double>{1, 2});
  auto [b, zb] = dynamic_standardize(a, std::vector<double>{3});
  CHECK(b == s);

  auto [e, ze] = dynamic_standardize(s, std::vector<double>{});
  CHECK(e == s);
  CHECK(ze.empty());
}

TEST_CASE("Welford matches the two-pass oracle across scales") {
  std::mt19937_64 rng(99);
  for (double sigma : {1e-3, 1.0, 1e3, 1e6}) {
    for (double offset : {0.0, 10.0}) {
      const auto xs = heppo::testing::normal_vector(rng, 100000, offset * sigma, sigma);
      const auto s = fold(xs);
      const auto oracle = two_pass(xs);
      CHECK(std::abs(s.mean() - oracle.mean) <= 1e-9 * (1 + std::abs(oracle.mean)));
      CHECK(std::abs(running_std(s) - oracle.stddev) <= 1e-9 * (1 + oracle.stddev));
      CHECK(s.agg() >= 0.0);
    }
  }
}

TEST_CASE("final running statistics are permutation invariant") {
  std::mt19937_64 rng(5);
  auto xs = heppo::testing::normal_vector(rng, 5000, 3.0, 2.0);
  const auto a = fold(xs);
  std::shuffle(xs.begin(), xs.end(), rng);
  const auto b = fold(xs);
  CHECK(std::abs(a.mean() - b.mean()) <= 1e-9 * std::abs(a.mean()));
  CHECK(std::abs(running_std(a) - running_std(b)) <= 1e-9 * running_std(a));
}

TEST_CASE("dynamic standardization keeps history across epochs") {
  std::mt19937_64 rng(6);
  const auto e1 = heppo::testing::normal_vector(rng, 300, 1.0, 1.0);
  const auto e2 = heppo::testing::normal_vector(rng, 200, 4.0, 3.0);
  auto both = e1;
  both.insert(both.end(), e2.begin(), e2.end());

  const auto split = dynamic_standardize(dynamic_standardize({}, e1).first, e2).first;
  const auto joined = dynamic_standardize({}, both).first;
  CHECK(split == joined);
}

TEST_CASE("block_stats examples") {
  auto s = block_stats(std::vector<double>{2, 4});
  CHECK(s.mu == 3.0);
  CHECK(s.sigma == 1.0);
  CHECK(s.count == 2);

  s = block_stats(std::vector<double>{-8.5});
  CHECK(s.mu == -8.5);
  CHECK(s.sigma == 0.0);

  s = block_stats(std::vector<double>{-1, 1});
  CHECK(s.mu == 0.0);
  CHECK(s.sigma == 1.0);

  CHECK_THROWS_AS(block_stats(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(block_stats(std::vector<double>{1, INFINITY}), ValidationError);
}

TEST_CASE("block_standardize and block_destandardize") {
  CHECK(block_standardize(std::vector<double>{2, 4}, {3, 1, 2}) == std::vector<double>{-1, 1});
  const std::vector<double> constant(4, 2.5);
  CHECK(block_standardize(constant, block_stats(constant)) == std::vector<double>(4, 0.0));

  const std::vector<double> unit{-1, 1};
  const auto again = block_standardize(unit, block_stats(unit));
  for (std::size_t i = 0; i < unit.size(); ++i) CHECK(std::abs(again[i] - unit[i]) <= 1e-12);

  CHECK(block_destandardize(std::vector<double>{0, 0}, {5, 2, 2}) == std::vector<double>{5, 5});
  CHECK(block_destandardize(std::vector<double>{-1, 1}, {3, 1, 2}) == std::vector<double>{2, 4});
}

TEST_CASE("destandardize inverts standardize when sigma is above the floor") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-3, 5)(rng));
    const auto v = heppo::testing::normal_vector(rng, 64, 0.5 * scale, scale);
    const auto stats = block_stats(v);
    const auto back = block_destandardize(block_standardize(v, stats), stats);
    double max_abs = 0.0;
    for (double x : v) max_abs = std::max(max_abs, std::abs(x));
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(std::abs(back[i] - v[i]) <= 1e-12 * (1 + max_abs));
    }
  }
}
