#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "heppo/error.hpp"
#include "heppo/quantization.hpp"
#include "test_util.hpp"

using namespace heppo;

namespace {

// Independent scalar bin formula used as the quantizer oracle.
int bin_oracle(double x, int bits, double range) {
  const double step = 2.0 * range / std::ldexp(1.0, bits);
  const double b = std::floor((x + range) / step);
  return static_cast<int>(std::clamp(b, 0.0, std::ldexp(1.0, bits) - 1));
}

double roundtrip_mse(std::span<const double> xs, const QuantScheme& s) {
  double sum = 0.0;
  for (double x : xs) {
    const double e = dequantize(quantize(x, s), s) - x;
    sum += e * e;
  }
  return sum / static_cast<double>(xs.size());
}

} // namespace

TEST_CASE("QuantScheme geometry") {
  for (int bits = 2; bits <= 16; ++bits) {
    const QuantScheme s(bits, 4.0);
    CHECK(std::abs(s.step() * s.levels() - 2 * s.range()) <= 1e-12);
    CHECK(s.max_code() == s.levels() - 1);
  }
  CHECK_THROWS_AS(QuantScheme(1, 4.0), ValidationError);
  CHECK_THROWS_AS(QuantScheme(17, 4.0), ValidationError);
  CHECK_THROWS_AS(QuantScheme(8, 0.0), ValidationError);
}

TEST_CASE("quantize examples") {
  const QuantScheme s(2, 1.0);
  CHECK(s.step() == 0.5);
  CHECK(quantize(-1.0, s) == 0);
  CHECK(quantize(-7.0, s) == 0);
  CHECK(quantize(1.0, s) == 3);
  CHECK(quantize(2.5, s) == 3);
  CHECK(quantize(0.3, s) == 2);
  CHECK_THROWS_AS(quantize(NAN, s), ValidationError);
  CHECK_THROWS_AS(quantize(INFINITY, s), ValidationError);
}

TEST_CASE("dequantize examples") {
  const QuantScheme s(2, 1.0);
  CHECK(dequantize(2, s) == 0.25);
  CHECK(std::abs(0.3 - dequantize(quantize(0.3, s), s)) <= s.step() / 2);
  const QuantScheme w(8, 4.0);
  CHECK(dequantize(0, w) == -4.0 + w.step() / 2);
  CHECK_THROWS_AS(dequantize(256, w), ValidationError);
}

TEST_CASE("quantizer matches the bin oracle, is monotone and saturates") {
  std::mt19937_64 rng(17);
  for (int bits : {2, 3, 8, 12, 16}) {
    const QuantScheme s(bits, 4.0);
    auto xs = heppo::testing::uniform_vector(rng, 20000, -6.0, 6.0);
    for (double edge : {1e308, -1e308, 4.0, -4.0, 0.0, std::nextafter(4.0, 0.0)}) xs.push_back(edge);
    std::sort(xs.begin(), xs.end());
    Code prev = 0;
    for (double x : xs) {
      const Code c = quantize(x, s);
      CHECK(c <= s.max_code());
      CHECK(c >= prev);
      if (std::abs(x) < 1e300) CHECK(c == bin_oracle(x, bits, 4.0));
      prev = c;
    }
    CHECK(quantize(1e308, s) == s.max_code());
    CHECK(quantize(-1e308, s) == 0);
  }
}

TEST_CASE("bin-center bound holds on the representable interval") {
  std::mt19937_64 rng(18);
  for (int bits : {2, 5, 8, 11}) {
    for (double range : {4.0, 1.0, 3.3}) {
      const QuantScheme s(bits, range);
      for (double x : heppo::testing::uniform_vector(rng, 20000, -range, range)) {
        CHECK(std::abs(dequantize(quantize(x, s), s) - x) <= s.step() / 2);
      }
      // Edges sit exactly step/2 from the outer centers, up to rounding of R.
      const double slack = 4 * std::numeric_limits<double>::epsilon() * range;
      CHECK(std::abs(dequantize(quantize(range, s), s) - range) <= s.step() / 2 + slack);
      CHECK(std::abs(dequantize(quantize(-range, s), s) + range) <= s.step() / 2 + slack);
    }
  }
}

TEST_CASE("reconstruction MSE on standard normal data") {
  std::mt19937_64 rng(19);
  const auto xs = heppo::testing::normal_vector(rng, 200000);
  double prev = INFINITY;
  for (int bits = 3; bits <= 10; ++bits) {
    const double mse = roundtrip_mse(xs, QuantScheme(bits, 4.0));
    CHECK(mse < prev);
    prev = mse;
  }
  const QuantScheme s(8, 4.0);
  CHECK(roundtrip_mse(xs, s) <= 1.1 * s.step() * s.step() / 12);
}

TEST_CASE("encode_rewards examples") {
  const QuantScheme s(8, 4.0);
  auto [cs, cq] = encode_rewards(std::vector<double>(5, 2.0), {}, s);
  CHECK(cq.codes == std::vector<Code>(5, s.zero_code()));
  CHECK(s.zero_code() == 128);

  const std::vector<double> r{1, 2, 3};
  auto [stats, q] = encode_rewards(r, {}, s);
  const double sigma = std::sqrt(2.0 / 3.0);
  std::vector<Code> expected;
  for (double x : r) expected.push_back(static_cast<Code>(bin_oracle((x - 2.0) / sigma, 8, 4.0)));
  CHECK(q.codes == expected);
  CHECK(q.codes == std::vector<Code>{88, 128, 167});

  auto [same, empty] = encode_rewards(std::vector<double>{}, stats, s);
  CHECK(empty.codes.empty());
  CHECK(same == stats);
}

TEST_CASE("decode_rewards stays in standardized units") {
  const QuantScheme s(8, 4.0);
  CHECK(decode_rewards({{s.zero_code()}, s}) == std::vector<double>{s.step() / 2});
  CHECK(decode_rewards({{}, s}).empty());

  std::mt19937_64 rng(20);
  const std::size_t n = 100000;
  const auto xs = heppo::testing::normal_vector(rng, n);
  const auto decoded = decode_rewards(encode_rewards(xs, {}, s).second);
  double mean = 0.0;
  for (double x : decoded) mean += x;
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("encode_values and decode_values") {
  const QuantScheme s(8, 4.0);
  const auto q = encode_values(std::vector<double>{2, 4}, s);
  CHECK(q.stats.mu == 3.0);
  CHECK(q.stats.sigma == 1.0);
  CHECK(q.codes == std::vector<Code>{static_cast<Code>(bin_oracle(-1, 8, 4)),
                                     static_cast<Code>(bin_oracle(1, 8, 4))});
  CHECK(q.codes == std::vector<Code>{96, 160});

  const auto c = encode_values(std::vector<double>(3, -1.5), s);
  CHECK(c.codes == std::vector<Code>(3, s.zero_code()));
  CHECK(c.stats.sigma == 0.0);
  CHECK(decode_values(c) == std::vector<double>(3, -1.5));

  CHECK(decode_values_standardized(encode_values(std::vector<double>{9.0}, s)) ==
        std::vector<double>{s.step() / 2});

  const QuantScheme fine(10, 4.0);
  const auto back = decode_values(encode_values(std::vector<double>{2, 4}, fine));
  CHECK(std::abs(back[0] - 2) <= fine.step() / 2);
  CHECK(std::abs(back[1] - 4) <= fine.step() / 2);

  CHECK_THROWS_AS(encode_values(std::vector<double>{}, s), ValidationError);
}

TEST_CASE("value round trip obeys the scaled bin bound") {
  std::mt19937_64 rng(21);
  const QuantScheme s(8, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = heppo::testing::normal_vector(rng, 256, 40.0, 7.0);
    const auto q = encode_values(v, s);
    const auto back = decode_values(q);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double z = (v[i] - q.stats.mu) / q.stats.sigma;
      if (std::abs(z) <= s.range()) {
        CHECK(std::abs(back[i] - v[i]) <= s.step() / 2 * q.stats.sigma + 1e-12);
      }
    }
  }
}

TEST_CASE("process_trajectory variants") {
  std::mt19937_64 rng(22);
  const QuantScheme s(8, 4.0);
  const Trajectory traj{heppo::testing::normal_vector(rng, 128, 1.0, 2.0),
                        heppo::testing::normal_vector(rng, 128, -3.0, 0.5), 0.25};

  SUBCASE("baseline passes through") {
    const auto p = process_trajectory(traj, DatapathVariant::Baseline, s, {});
    CHECK(p.traj.rewards == traj.rewards);
    CHECK(p.traj.values == traj.values);
    CHECK(p.traj.bootstrap_value == traj.bootstrap_value);
    CHECK(p.stats == RunningStats{});
  }

  SUBCASE("dynamic standardization without quantization") {
    const auto p = process_trajectory(traj, DatapathVariant::DynStdRewards, s, {});
    const auto [stats, z] = dynamic_standardize({}, traj.rewards);
    CHECK(p.traj.rewards == z);
    CHECK(p.traj.values == traj.values);
    CHECK(p.stats == stats);
  }

  SUBCASE("variant 5 values stay within the scaled bound") {
    const auto p = process_trajectory(traj, DatapathVariant::DynRewardsBlockValues, s, {});
    const auto vs = block_stats(traj.values);
    for (std::size_t i = 0; i < traj.length(); ++i) {
      CHECK(std::abs(p.traj.values[i] - traj.values[i]) <= s.step() / 2 * vs.sigma + 1e-12);
    }
    CHECK(p.stats.count() == traj.length());
  }

  SUBCASE("variants 3 and 4 differ only by reward de-standardization") {
    const auto p3 = process_trajectory(traj, DatapathVariant::BlockBothDestd, s, {});
    const auto p4 = process_trajectory(traj, DatapathVariant::BlockBothNoDestdRewards, s, {});
    const auto rs = block_stats(traj.rewards);
    for (std::size_t i = 0; i < traj.length(); ++i) {
      CHECK(std::abs(p4.traj.rewards[i] - (p3.traj.rewards[i] - rs.mu) / rs.sigma) <= 1e-9);
    }
    CHECK(p3.traj.values == p4.traj.values);
  }
}

TEST_CASE("variant indices") {
  for (int i = 1; i <= 5; ++i) CHECK(variant_index(variant_from_index(i)) == i);
  CHECK_THROWS_AS(variant_from_index(0), ValidationError);
  CHECK_THROWS_AS(variant_from_index(6), ValidationError);
}
