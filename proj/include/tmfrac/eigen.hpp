#pragma once

#include "tmfrac/fracspace.hpp"

namespace tmfrac {

struct EigenOptions {
  double tol = 1e-10;    // relative quotient change at which to stop
  int max_iter = 100000;
  int n_starts = 3;      // extra random starts for the p != 2 descent
  unsigned seed = 20240901;
};

struct EigenResult {
  double lambda = 0.0;         // Rayleigh quotient of the returned eigenfunction
  RadialFunction eigenfunction;  // nonnegative, nonincreasing, ||u||_{L^p_theta} = 1
  int iterations = 0;
  double residual = 0.0;       // relative quotient change at the final step
};

// Discrete Rayleigh quotient ||u'||^p_{L^p_alpha} / ||u||^p_{L^p_theta} on the
// grid, using the same nodal convention as norms().
double rayleigh_quotient(const RadialFunction& u, const Params& params);

// lambda_{alpha,theta} = inf ||u'||^p / ||u||^p. Inverse-power iteration on
// the generalized tridiagonal problem for p = 2, normalized projected descent
// with Armijo backtracking otherwise.
EigenResult principal_eigenvalue(const Params& params, const GridPtr& grid,
                                 EigenOptions opts = {});

}  // namespace tmfrac
