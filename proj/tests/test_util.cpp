#include "doctest.h"
#include "sdmri/util.hpp"

#include <random>

using namespace sdmri;

TEST_CASE("pairwise sum matches sequential sum to roundoff") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1, 1);
  std::vector<double> v(10007);
  for (auto& x : v) x = unif(rng);
  const double a = pairwise_sum(v);
  const double b = sequential_sum(v);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("pairwise sum is independent of evaluation context") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (i + 1);
  const double once = pairwise_sum(v);
  CHECK(pairwise_sum(v) == once);  // bitwise repeatable
}

TEST_CASE("sha256 of empty string is the known digest") {
  CHECK(to_hex(sha256_string("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("parallel_for_index covers every index exactly once") {
  std::vector<int> hits(257, 0);
  parallel_for_index(hits.size(), 0, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("parallel_for_index propagates exceptions") {
  CHECK_THROWS_AS(
      parallel_for_index(8, 2,
                         [&](std::size_t i) {
                           if (i == 5) throw NumericError("boom");
                         }),
      NumericError);
}

TEST_CASE("format_g17 round-trips doubles") {
  for (double v : {1.0 / 3.0, 1e-17, 123456.789, -0.1}) {
    CHECK(std::stod(format_g17(v)) == v);
  }
}
