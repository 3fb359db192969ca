#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixl/draws.hpp"
#include "mixl/errors.hpp"
#include "support.hpp"

using namespace mixl;

namespace {

// Bisection on the complementary error function in long double.
double quantile_oracle(double u) {
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double cdf = 0.5L * std::erfc(-mid / std::sqrt(2.0L));
    (cdf < u ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace

TEST_CASE("one draw per person and dimension is a single offset in (0,1)") {
  const auto b = mlhs(3, 1, 2, 5);
  CHECK(b.values().size() == 6);
  for (double v : b.values()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("stratified mean is within half a stratum") {
  const auto b = mlhs(1, 100, 1, 9);
  const double mean = std::accumulate(b.values().begin(), b.values().end(), 0.0) / 100.0;
  CHECK(std::abs(mean - 0.5) <= 0.005);
}

TEST_CASE("same seed and shape give identical blocks, different seeds differ") {
  CHECK(mlhs(4, 7, 3, 21) == mlhs(4, 7, 3, 21));
  CHECK(!(mlhs(4, 7, 3, 21) == mlhs(4, 7, 3, 22)));
}

TEST_CASE("every (person, dimension) fills each stratum exactly once") {
  Rng pick(17);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 1 + pick.index(4), R = 1 + pick.index(60), D = 1 + pick.index(4);
    const auto b = mlhs(n, R, D, 100 + static_cast<std::uint64_t>(rep));
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t d = 0; d < D; ++d) {
        std::vector<std::size_t> strata;
        for (std::size_t r = 0; r < R; ++r) {
          const double v = b(p, r, d);
          REQUIRE(v > 0.0);
          REQUIRE(v < 1.0);
          strata.push_back(static_cast<std::size_t>(v * static_cast<double>(R)));
        }
        std::sort(strata.begin(), strata.end());
        for (std::size_t i = 0; i < R; ++i) CHECK(strata[i] == i);
      }
    }
  }
}

TEST_CASE("dimensions are shuffled independently") {
  const auto b = mlhs(1, 50, 2, 3);
  std::size_t same = 0;
  for (std::size_t r = 0; r < 50; ++r) {
    same += static_cast<std::size_t>(b(0, r, 0) * 50) == static_cast<std::size_t>(b(0, r, 1) * 50);
  }
  CHECK(same < 10);
}

TEST_CASE("zero counts are rejected") {
  CHECK_THROWS_AS(mlhs(0, 5, 1, 1), Error);
  CHECK_THROWS_AS(mlhs(1, 0, 1, 1), Error);
  CHECK_THROWS_AS(mlhs(1, 5, 0, 1), Error);
}

TEST_CASE("inverse normal CDF against a bisection oracle") {
  CHECK(std::abs(inverse_normal_cdf(0.5)) < 1e-15);
  CHECK(std::abs(inverse_normal_cdf(0.975) - 1.959964) < 1e-5);
  CHECK(std::abs(inverse_normal_cdf(0.025) + 1.959964) < 1e-5);
  for (double u : {1e-12, 1e-9, 1e-6, 1e-3, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1 - 1e-6, 1 - 1e-9}) {
    CHECK(std::abs(inverse_normal_cdf(u) - quantile_oracle(u)) < 1e-9);
  }
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform();
    CHECK(std::abs(inverse_normal_cdf(u) - quantile_oracle(u)) < 1e-9);
    CHECK(std::abs(inverse_normal_cdf(u) + inverse_normal_cdf(1.0 - u)) < 1e-10);
  }
}

TEST_CASE("inverse normal CDF is monotone and clamps the tails") {
  double prev = -INFINITY;
  for (int i = 1; i < 10000; ++i) {
    const double v = inverse_normal_cdf(i / 10000.0);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(std::isfinite(inverse_normal_cdf(0.0)));
  CHECK(inverse_normal_cdf(0.0) == inverse_normal_cdf(1e-12));
  CHECK(inverse_normal_cdf(1.0) == inverse_normal_cdf(1.0 - 1e-12));
}

TEST_CASE("to_std_normal maps elementwise and checks the kind") {
  const auto u = mlhs(2, 5, 2, 8);
  const auto z = to_std_normal(u);
  CHECK(z.kind() == DrawKind::StdNormal);
  for (std::size_t i = 0; i < u.values().size(); ++i) CHECK(z.values()[i] == inverse_normal_cdf(u.values()[i]));
  CHECK_THROWS_AS(to_std_normal(z), Error);
}

TEST_CASE("rng streams") {
  Rng a(1), b(1);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(5);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = c.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 30000; ++i) ++counts[c.index(3)];
  for (int k : counts) CHECK(std::abs(k - 10000) < 400);
}

TEST_CASE("draws export") {
  mixl::testing::TempDir dir;
  write_draws_csv(mlhs(1, 2, 1, 3), dir / "d.csv");
  std::ifstream in(dir / "d.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "person,draw,dim,value");
}
