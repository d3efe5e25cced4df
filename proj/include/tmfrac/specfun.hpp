#pragma once

namespace tmfrac::specfun {

// Euler-Mascheroni constant, lim_m (sum_{j<=m} 1/j - ln m).
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

struct SpecfunConfig {
  double rel_tol = 1e-12;  // relative tolerance for series / quadrature
  int max_terms = 200;     // cap on series length
  void validate() const;   // throws std::invalid_argument on violation
};

// Gamma function for x > 0: recurrence shift to x >= 10, then Stirling series.
double log_gamma(double x);
double gamma(double x);

// Digamma Psi(x) = Gamma'(x)/Gamma(x) for x > 0, same shift/series scheme.
double digamma(double x);

// Returns kEulerGamma. The constant is checked once against Psi(1) = -gamma.
double euler_gamma();

// B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y) for x, y > 0.
double beta(double x, double y);

struct TruncatedBeta {
  double value;       // int_0^a s^{x-1}/(1+s)^x ds
  double asymptotic;  // ln(1+a) - Psi(x) - gamma
  double residual;    // |value - asymptotic|, O(1/a) as a -> infinity
};

// Truncated Beta-type integral; the tail of [1, a] is mapped to [1/a, 1]
// by s -> 1/s so both pieces stay on finite smooth intervals.
TruncatedBeta truncated_beta_integral(double a, double x, const SpecfunConfig& cfg = {});

}  // namespace tmfrac::specfun
