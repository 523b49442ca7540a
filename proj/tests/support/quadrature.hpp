#pragma once

// Chi-square CDF by adaptive Simpson quadrature, independent of the library's
// incomplete-gamma path. The substitution x = t^2 removes the df=1 endpoint
// singularity; Gamma(df/2) comes from the exact half-integer recursion.

#include <cmath>
#include <functional>

namespace quadrature {

inline long double gamma_half_integer(int twice_a) {
  // twice_a = 2a with a a positive integer multiple of 1/2.
  if (twice_a == 1) return std::sqrt(3.14159265358979323846264338327950288L);
  if (twice_a == 2) return 1.0L;
  return (0.5L * (twice_a - 2)) * gamma_half_integer(twice_a - 2);
}

inline long double simpson(const std::function<long double(long double)>& f, long double a,
                           long double b, long double fa, long double fb, long double fm,
                           long double eps, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
  const long double flm = f(lm), frm = f(rm);
  const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0L * eps)
    return left + right + (left + right - whole) / 15.0L;
  return simpson(f, a, m, fa, fm, flm, 0.5L * eps, depth - 1) +
         simpson(f, m, b, fm, fb, frm, 0.5L * eps, depth - 1);
}

// P(chi2_df <= x) via the substituted integrand 2 t^{df-1} e^{-t^2/2} / norm
// on t in [0, sqrt(x)].
inline long double chi2_cdf(long double x, int df) {
  if (x <= 0.0L) return 0.0L;
  const long double norm =
      std::pow(2.0L, 0.5L * df) * gamma_half_integer(df);
  auto f = [&](long double t) -> long double {
    return 2.0L * std::pow(t, static_cast<long double>(df - 1)) * std::exp(-0.5L * t * t) / norm;
  };
  const long double hi = std::sqrt(x);
  return simpson(f, 0.0L, hi, f(0.0L), f(hi), f(0.5L * hi), 1e-14L, 40);
}

// Inverse by bisection on the quadrature CDF.
inline long double chi2_quantile(long double p, int df) {
  long double lo = 0.0L, hi = 1.0L;
  while (chi2_cdf(hi, df) < p) hi *= 2.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (chi2_cdf(mid, df) < p) lo = mid;
    else hi = mid;
    if (hi - lo < 1e-10L) break;
  }
  return 0.5L * (lo + hi);
}

}  // namespace quadrature
