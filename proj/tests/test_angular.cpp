#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "core/angular.hpp"
#include "core/errors.hpp"

using combraman::angular::clebsch_gordan;
using combraman::angular::wigner3j;

namespace {

// Independent Clebsch-Gordan oracle: build |J J> as the stretched product
// state and apply J- repeatedly; coefficients come from ladder algebra
// only, no Racah sum.
std::map<std::pair<double, double>, double> cg_ladder(double j1, double j2,
                                                      double J, double M) {
  // state: coefficients on |m1, m2>
  std::map<std::pair<double, double>, double> state;
  if (J == j1 + j2) {
    state[{j1, j2}] = 1.0;
  } else {
    // |J J> for J < j1+j2: orthogonal complement within the M = J space,
    // constructed recursively from the J+1 ladder family.
    auto higher = cg_ladder(j1, j2, J + 1.0, J);
    // M = J subspace is 2-dimensional for J = j1+j2-1 (the only case the
    // tests need); take the orthogonal vector with Condon-Shortley sign
    // (coefficient of the highest m1 positive).
    std::vector<std::pair<double, double>> basis;
    for (double m1 = j1; m1 >= -j1 - 1e-9; m1 -= 1.0) {
      const double m2 = J - m1;
      if (std::abs(m2) <= j2 + 1e-9) basis.push_back({m1, m2});
    }
    REQUIRE(basis.size() == 2);
    const double a = higher[basis[0]], b = higher[basis[1]];
    state[basis[0]] = b;
    state[basis[1]] = -a;
    const double n = std::sqrt(a * a + b * b);
    for (auto& [k, v] : state) v /= n;
    if (state[basis[0]] < 0.0)
      for (auto& [k, v] : state) v = -v;
  }
  // lower from M' = J to the requested M
  for (double Mp = J; Mp > M + 1e-9; Mp -= 1.0) {
    std::map<std::pair<double, double>, double> next;
    const double norm =
        std::sqrt(J * (J + 1.0) - Mp * (Mp - 1.0));  // J- on |J Mp>
    for (const auto& [key, c] : state) {
      const auto [m1, m2] = key;
      if (m1 > -j1 + 1e-9)
        next[{m1 - 1.0, m2}] +=
            c * std::sqrt(j1 * (j1 + 1.0) - m1 * (m1 - 1.0)) / norm;
      if (m2 > -j2 + 1e-9)
        next[{m1, m2 - 1.0}] +=
            c * std::sqrt(j2 * (j2 + 1.0) - m2 * (m2 - 1.0)) / norm;
    }
    state = std::move(next);
  }
  return state;
}

}  // namespace

TEST_CASE("3j selection rules") {
  CHECK(wigner3j(1, 1, 3, 0, 0, 0) == 0.0);       // triangle violation
  CHECK(wigner3j(1, 1, 1, 1, 1, 1) == 0.0);       // m-sum nonzero
  CHECK(wigner3j(1, 1, 2, 0, 0, 0) != 0.0);
  CHECK(wigner3j(1, 1, 1, 0, 0, 0) == 0.0);       // odd sum at m=0
}

TEST_CASE("3j known closed forms") {
  CHECK(wigner3j(1, 1, 0, 0, 0, 0) == doctest::Approx(-1.0 / std::sqrt(3.0))
                                          .epsilon(1e-14));
  CHECK(wigner3j(2, 2, 0, 1, -1, 0) ==
        doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-14));
  // (j j 0; m -m 0) = (-1)^(j-m)/sqrt(2j+1)
  CHECK(wigner3j(2.5, 2.5, 0, 1.5, -1.5, 0) ==
        doctest::Approx(-1.0 / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(wigner3j(1, 1, 2, 1, -1, 0) ==
        doctest::Approx(1.0 / std::sqrt(30.0)).epsilon(1e-14));
}

TEST_CASE("Clebsch-Gordan against the ladder-operator oracle") {
  const std::vector<std::pair<double, double>> systems = {
      {1.5, 1.0}, {2.5, 1.0}, {2.0, 0.5}, {1.0, 1.0}};
  for (const auto& [j1, j2] : systems) {
    for (double J = j1 + j2; J >= j1 + j2 - 1.0 - 1e-9; J -= 1.0) {
      if (J < std::abs(j1 - j2) - 1e-9) continue;
      for (double M = J; M >= -J - 1e-9; M -= 1.0) {
        const auto oracle = cg_ladder(j1, j2, J, M);
        for (const auto& [key, expected] : oracle) {
          const auto [m1, m2] = key;
          CHECK(clebsch_gordan(j1, m1, j2, m2, J, M) ==
                doctest::Approx(expected).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("Clebsch-Gordan orthonormality") {
  // sum over (m1, m2) of <j1 m1 j2 m2|J M>^2 = 1
  const double j1 = 1.5, j2 = 1.0;
  for (double J = 0.5; J <= 2.5 + 1e-9; J += 1.0) {
    for (double M = -J; M <= J + 1e-9; M += 1.0) {
      double sum = 0.0;
      for (double m1 = -j1; m1 <= j1 + 1e-9; m1 += 1.0)
        for (double m2 = -j2; m2 <= j2 + 1e-9; m2 += 1.0) {
          const double c = clebsch_gordan(j1, m1, j2, m2, J, M);
          sum += c * c;
        }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("3j rejects non-half-integers") {
  CHECK_THROWS_AS(wigner3j(0.3, 1, 1, 0, 0, 0), combraman::ConfigError);
}
