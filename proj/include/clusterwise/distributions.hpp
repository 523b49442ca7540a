#pragma once

// Chi-square distribution functions via the regularized incomplete gamma
// (series for x < a+1, continued fraction otherwise) and the standard normal
// CDF. Dependency-free, accurate to ~1e-12.

namespace clusterwise {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// P(chi2_df <= x). Throws DomainError for x < 0 or df < 1.
double chi2_cdf(double x, int df);

// Inverse of chi2_cdf in x for p in (0,1); bracketed Newton with bisection
// fallback, |cdf(q) - p| <= 1e-12 or bracket width below 1e-10 relative.
double chi2_quantile(double p, int df);

double normal_cdf(double x);

}  // namespace clusterwise
