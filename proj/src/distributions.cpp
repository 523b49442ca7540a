#include "clusterwise/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "clusterwise/errors.hpp"

namespace clusterwise {

namespace {

// Series representation of P(a,x); converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) (modified Lentz); good for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_cdf(double x, int df) {
  if (df < 1) throw DomainError("chi2_cdf: df must be >= 1");
  if (x < 0.0) throw DomainError("chi2_cdf: x must be >= 0");
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, int df) {
  if (df < 1) throw DomainError("chi2_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must be in (0,1)");

  // Wilson-Hilferty starting point.
  const double z = [&] {
    // Acklam-style rational approximation is overkill here; a coarse start is
    // enough for the bracketed Newton below.
    const double t = p < 0.5 ? std::sqrt(-2.0 * std::log(p)) : std::sqrt(-2.0 * std::log(1.0 - p));
    double approx = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    return p < 0.5 ? -approx : approx;
  }();
  const double nu = static_cast<double>(df);
  double x = nu * std::pow(1.0 - 2.0 / (9.0 * nu) + z * std::sqrt(2.0 / (9.0 * nu)), 3.0);
  if (!(x > 0.0) || !std::isfinite(x)) x = nu;

  // Establish a bracket [lo, hi] with cdf(lo) <= p <= cdf(hi).
  double lo = 0.0, hi = x;
  while (chi2_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) break;
  }

  for (int it = 0; it < 200; ++it) {
    const double f = chi2_cdf(x, df) - p;
    if (f > 0.0) hi = x;
    else lo = x;
    if (std::fabs(f) < 1e-13) break;
    const double log_pdf = (0.5 * nu - 1.0) * std::log(x) - 0.5 * x -
                           0.5 * nu * 0.6931471805599453 - std::lgamma(0.5 * nu);
    const double pdf = std::exp(log_pdf);
    double next = (pdf > 0.0 && std::isfinite(pdf)) ? x - f / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-12 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace clusterwise
