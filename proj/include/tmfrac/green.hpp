#pragma once

#include <vector>

#include "tmfrac/fracspace.hpp"

namespace tmfrac {

struct GreenOptions {
  double tol = 1e-10;     // sup-norm fixed-point tolerance
  int max_iter = 1000;
  double damping = 0.7;   // g <- (1 - tau) g + tau T(g)
  double lambda_theta = -1.0;  // precomputed admissibility threshold, if any
  double start_scale = 1.0;    // scales the nu = 0 closed-form start
};

struct GreenResult {
  RadialFunction g;           // derivative filled from the integral identity
  RadialFunction z;           // remainder g + (theta+1)/mu ln r - A0
  std::vector<double> sigma;  // sigma(t) = [(1 + nu int_0^t |g|^{p-1})^{1/(p-1)} - 1]/t
  double A0 = 0.0;            // formula route, used downstream
  double A0_fit = 0.0;        // least-squares fit over the smallest decade
  double A0_formula = 0.0;
  double fit_deviation = 0.0;  // rms of the fitted constant over that decade
  double upper_bound = 0.0;    // |B_R|_theta + e^{mu A0 + Psi(p) + gamma} |B_1|_theta
  double residual = 0.0;       // sup-norm fixed-point residual
  int iterations = 0;

  double sigma_at(double r) const;  // linear interpolation in ln r, sigma(0) = 0
};

// Damped Picard iteration on
//   g(r) = (theta+1)/mu int_r^R (1/t) (1 + nu int_0^t |g|^{p-1} d lambda_theta)^{1/(p-1)} dt,
// started from the nu = 0 closed form (theta+1)/mu ln(R/r).
GreenResult solve_green(const Params& params, const GridPtr& grid, GreenOptions opts = {});

struct A0Estimate {
  double fit;        // constant fit of g + (theta+1)/mu ln r near the origin
  double formula;    // (theta+1)/mu (int_0^R sigma + ln R)
  double deviation;  // rms deviation of the fit
};

A0Estimate extract_A0(const RadialFunction& g, const Params& params);

// U = |B_R|_theta + e^{mu A0 + Psi(p) + gamma} |B_1|_theta.
double upper_bound(const Params& params, double A0);

}  // namespace tmfrac
