#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles/quad.hpp"
#include "sdmri/seq.hpp"

using namespace sdmri;

namespace {

// b-value straight from the definition, by adaptive quadrature of F^2.
double bvalue_quadrature(const seq::Pgse& s, double amplitude) {
  const auto f2 = [&](double t) {
    const double F = s.profile_integral(t);
    return F * F;
  };
  const double integral =
      oracle::integrate_piecewise(f2, {0.0, s.delta_ms, s.Delta_ms, s.te()}, 1e-14);
  const double g2 = seq::kGammaInternal * seq::kGammaInternal * amplitude * amplitude;
  return g2 * integral * seq::kBInternalToSmm2;
}

}  // namespace

TEST_CASE("pgse profile and rephasing") {
  const seq::Pgse s(10.6, 13.0, "seq1");
  CHECK(s.profile(5) == 1);
  CHECK(s.profile(12) == 0);
  CHECK(s.profile(20) == -1);
  CHECK(s.profile_integral(s.te()) == 0.0);  // F(TE) = 0
  const double total = oracle::integrate_piecewise(
      [&](double t) { return s.profile(t); }, {0.0, s.delta_ms, s.Delta_ms, s.te()}, 1e-14);
  CHECK(std::abs(total) < 1e-12);
}

TEST_CASE("invalid sequences are rejected") {
  CHECK_THROWS_AS(seq::Pgse(0.0, 1.0), InputError);
  CHECK_THROWS_AS(seq::Pgse(2.0, 1.0), InputError);
}

TEST_CASE("closed-form b-value equals the quadrature oracle") {
  const seq::Pgse s1(10.6, 13.0, "seq1");
  CHECK(seq::bvalue(s1, 0.0) == 0.0);

  const double amp1000 = seq::amplitude_for_b(s1, 1000.0);
  CHECK(seq::bvalue(s1, amp1000) ==
        doctest::Approx(bvalue_quadrature(s1, amp1000)).epsilon(1e-10));

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ud(0.5, 40.0), ua(0.0, 0.5);
  for (int i = 0; i < 20; ++i) {
    const double d = ud(rng);
    const double D = d + ud(rng);
    const double a = ua(rng);
    const seq::Pgse s(d, D);
    CHECK(seq::bvalue(s, a) == doctest::Approx(bvalue_quadrature(s, a)).epsilon(1e-9));
  }
}

TEST_CASE("amplitude_for_b inverts bvalue") {
  const seq::Pgse s(10.6, 13.0);
  CHECK(seq::amplitude_for_b(s, 0.0) == 0.0);
  for (double b : {1000.0, 4000.0}) {
    const double a = seq::amplitude_for_b(s, b);
    CHECK(seq::bvalue(s, a) == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("paper-scale amplitude check: 0.3745 T/m at delta=Delta=25ms") {
  const seq::Pgse s(25.0, 25.0);
  const double b = seq::bvalue(s, 0.3745);
  CHECK(b == doctest::Approx(104167.0).epsilon(5e-3));  // published value is rounded
}

TEST_CASE("b-value scales quadratically in amplitude") {
  const seq::Pgse s(5.0, 20.0);
  const double b1 = seq::bvalue(s, 0.13);
  const double b2 = seq::bvalue(s, 0.26);
  CHECK(b2 == doctest::Approx(4.0 * b1).epsilon(1e-14));
}

TEST_CASE("direction sets are unit norm and well spread") {
  const auto one = seq::directions(1);
  REQUIRE(one.size() == 1);
  CHECK(std::abs(std::hypot(one[0][0], one[0][1], one[0][2]) - 1.0) < 1e-15);

  const auto dirs = seq::directions(151);
  double min_angle = 1e9;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double n = std::hypot(dirs[i][0], dirs[i][1], dirs[i][2]);
    CHECK(std::abs(n - 1.0) < 1e-15);
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double dot = dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1] +
                         dirs[i][2] * dirs[j][2];
      min_angle = std::min(min_angle, std::acos(std::min(1.0, std::abs(dot))));
    }
  }
  CHECK(min_angle > 0);

  // Near-equal-area spacing: nearest neighbor within 2x of sqrt(4 pi / n).
  const int n = 900;
  const auto big = seq::directions(n);
  const double ideal = std::sqrt(4.0 * M_PI / n);
  double worst_nn = 0;
  for (int i = 0; i < n; ++i) {
    double nn = 1e9;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dot = big[i][0] * big[j][0] + big[i][1] * big[j][1] + big[i][2] * big[j][2];
      nn = std::min(nn, std::acos(std::clamp(dot, -1.0, 1.0)));
    }
    worst_nn = std::max(worst_nn, nn);
  }
  CHECK(worst_nn < 2.0 * ideal);
}

TEST_CASE("hemisphere flag mirrors to z >= 0") {
  const auto dirs = seq::directions(64, true);
  for (const auto& d : dirs) CHECK(d[2] >= 0.0);
}

TEST_CASE("gradient validation") {
  CHECK_THROWS_AS(seq::Gradient({1, 1, 0}, 0.1), InputError);
  CHECK_THROWS_AS(seq::Gradient({1, 0, 0}, -0.1), InputError);
  const seq::Gradient g({0, 0, 1}, 0.25);
  CHECK(g.g()[2] == 0.25);
}
