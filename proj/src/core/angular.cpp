#include "core/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "core/errors.hpp"

namespace combraman::angular {

namespace {

// Exact in double up to 22!, adequate for dipole couplings of small j.
constexpr int kMaxFact = 60;

const std::array<double, kMaxFact>& factorials() {
  static const std::array<double, kMaxFact> table = [] {
    std::array<double, kMaxFact> f{};
    f[0] = 1.0;
    for (int i = 1; i < kMaxFact; ++i) f[i] = f[i - 1] * static_cast<double>(i);
    return f;
  }();
  return table;
}

double fact(double x) { return factorials()[static_cast<int>(std::lround(x))]; }

double triangle_coeff(double a, double b, double c) {
  return std::sqrt(fact(a + b - c) * fact(a - b + c) * fact(-a + b + c) /
                   fact(a + b + c + 1.0));
}

bool triangle_ok(double a, double b, double c) {
  return c >= std::abs(a - b) - 1e-9 && c <= a + b + 1e-9;
}

int iround(double x) { return static_cast<int>(std::lround(x)); }

}  // namespace

bool is_half_integer(double x) {
  return std::abs(2.0 * x - std::lround(2.0 * x)) < 1e-9;
}

double wigner3j(double j1, double j2, double j3, double m1, double m2,
                double m3) {
  for (double v : {j1, j2, j3, m1, m2, m3})
    if (!is_half_integer(v))
      throw ConfigError("angular momentum arguments must be half-integers");
  if (std::abs(m1) > j1 + 1e-9 || std::abs(m2) > j2 + 1e-9 ||
      std::abs(m3) > j3 + 1e-9)
    return 0.0;
  if (std::abs(m1 + m2 + m3) > 1e-9) return 0.0;
  if (!triangle_ok(j1, j2, j3)) return 0.0;
  // j+m must be an integer for each column, and the perimeter integral.
  for (auto [j, m] : {std::pair{j1, m1}, {j2, m2}, {j3, m3}})
    if (std::abs(j + m - std::lround(j + m)) > 1e-9) return 0.0;
  if (std::abs(j1 + j2 + j3 - std::lround(j1 + j2 + j3)) > 1e-9) return 0.0;

  const int tmin = std::max({0, iround(j2 - j3 - m1), iround(j1 - j3 + m2)});
  const int tmax =
      std::min({iround(j1 + j2 - j3), iround(j1 - m1), iround(j2 + m2)});
  double sum = 0.0;
  for (int t = tmin; t <= tmax; ++t) {
    const double d = fact(t) * fact(j3 - j2 + m1 + t) * fact(j3 - j1 - m2 + t) *
                     fact(j1 + j2 - j3 - t) * fact(j1 - m1 - t) *
                     fact(j2 + m2 - t);
    sum += ((t % 2) ? -1.0 : 1.0) / d;
  }
  const double norm =
      triangle_coeff(j1, j2, j3) *
      std::sqrt(fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) *
                fact(j3 + m3) * fact(j3 - m3));
  const int phase = iround(j1 - j2 - m3);
  return ((phase % 2) ? -1.0 : 1.0) * norm * sum;
}

double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M) {
  const int phase = iround(j1 - j2 + M);
  return ((phase % 2) ? -1.0 : 1.0) * std::sqrt(2.0 * J + 1.0) *
         wigner3j(j1, j2, J, m1, m2, -M);
}

}  // namespace combraman::angular
