// SPDX-License-Identifier: Apache-2.0
//
// Regularized incomplete beta and gamma functions by continued fractions
// (modified Lentz) and series. Target accuracy is about 1e-13 relative,
// well inside the 1e-10 needed for p-values.
#include <cmath>
#include <limits>

#include "kc/error.hpp"
#include "kc/evalstats.hpp"

namespace kc::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) {
    d = kTiny;
  }
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) {
      d = kTiny;
    }
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) {
      c = kTiny;
    }
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) {
      d = kTiny;
    }
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) {
      c = kTiny;
    }
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      return h;
    }
  }
  throw NumericError("incomplete beta: continued fraction did not converge");
}

double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericError("incomplete gamma: series did not converge");
}

double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) {
      d = kTiny;
    }
    c = b + an / c;
    if (std::fabs(c) < kTiny) {
      c = kTiny;
    }
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw NumericError("incomplete gamma: continued fraction did not converge");
}

} // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw NumericError("incomplete beta: shape parameters must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw NumericError("incomplete beta: x outside [0, 1]");
  }
  if (x == 0.0 || x == 1.0) {
    return x;
  }
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double incomplete_gamma_upper(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw NumericError("incomplete gamma: requires a > 0 and x >= 0");
  }
  if (x == 0.0) {
    return 1.0;
  }
  if (std::isinf(x)) {
    return 0.0;
  }
  if (x < a + 1.0) {
    return 1.0 - gamma_series(a, x);
  }
  return gamma_continued_fraction(a, x);
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) {
    throw NumericError("student t: df must be positive");
  }
  if (std::isinf(t)) {
    return t > 0 ? 1.0 : 0.0;
  }
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

double f_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw NumericError("F distribution: degrees of freedom must be positive");
  }
  if (f <= 0.0) {
    return 1.0;
  }
  if (std::isinf(f)) {
    return 0.0;
  }
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) {
    return 1.0;
  }
  return incomplete_gamma_upper(df / 2.0, x / 2.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace kc::stats
