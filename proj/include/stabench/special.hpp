#pragma once

namespace stabench::special {

double normal_pdf(double z);
double normal_cdf(double z);

// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x).
// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_sf(double x, double dof);

}  // namespace stabench::special
