#pragma once

namespace combraman::angular {

// True if x is an integer or half-integer within tolerance.
bool is_half_integer(double x);

// Wigner 3j symbol (j1 j2 j3; m1 m2 m3), Racah sum formula.
// Arguments are integers or half-integers. Returns 0 when the symbol
// vanishes by selection rules.
double wigner3j(double j1, double j2, double j3, double m1, double m2,
                double m3);

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>, Condon-Shortley phases.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M);

}  // namespace combraman::angular
