#pragma once

namespace dcmsg {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// Regularized lower incomplete gamma P(a, x).
double incomplete_gamma(double a, double x);

// Two-sided p-value of a Student t statistic with df degrees of freedom.
double student_t_two_sided(double t, double df);

// Upper tail of a chi-square distribution.
double chi_square_sf(double x, double df);

}  // namespace dcmsg
