#pragma once

#include "tmfrac/fracspace.hpp"

namespace tmfrac {

struct SolverOptions {
  double tol = 1e-8;          // sup-norm tolerance on the iterate change
  int max_iter = 10000;
  double damping = 0.5;       // u <- (1 - tau) u + tau T(u)
  int n_starts = 3;           // starts used by the ascent oracle
  double lambda_theta = -1.0; // pass a precomputed lambda_{alpha,theta};
                              // negative means compute it when nu > 0
  bool allow_small_eps = false;  // lift the eps >= 0.02 mu floor
  unsigned seed = 20240902;
};

struct MaximizerResult {
  RadialFunction u;              // nonnegative, nonincreasing, H_nu(u) = 1
  double S_eps = 0.0;            // functional value at mu_eps
  double lambda_eps = 0.0;       // Lagrange normalization
  double a_eps = 0.0;            // peak value u(r -> 0+)
  double mu_eps = 0.0;           // mu_{alpha,theta} - eps
  double fixed_point_residual = 0.0;  // sup-norm of u - T(u)
  int iterations = 0;
  bool converged = false;
};

// int_0^R exp(mu |u|^{p/(p-1)}) d lambda_theta, exponential evaluated at the
// nodes. Throws FunctionalOverflow when mu |u|^{p/(p-1)} > 700 at some node.
double moser_functional(const RadialFunction& u, double mu, const Params& params);

// lambda = int_0^R exp(mu u^{p/(p-1)}) u^{p/(p-1)} d lambda_theta.
double lagrange_lambda(const RadialFunction& u, double mu, const Params& params);

// Right-hand side of the integral representation: G(r) such that the
// Euler-Lagrange system reads -u'(r) = G(r). Exposed for residual checks.
std::vector<double> euler_lagrange_rhs(const RadialFunction& u, double mu_eps,
                                       const Params& params, double lambda);

// Subcritical maximizer via the damped fixed point on
//   T(u)(r) = int_r^R [ (1/(omega_alpha t^alpha)) int_0^t (lambda(u)^{-1}
//             e^{mu_eps u^{p/(p-1)}} u^{1/(p-1)} + nu u^{p-1}) d lambda_theta
//             ]^{1/(p-1)} dt,
// with lambda recomputed each sweep and the iterate rescaled to H_nu = 1.
MaximizerResult solve_subcritical(const Params& params, double eps, const GridPtr& grid,
                                  SolverOptions opts = {});

// Independent verification oracle: projected gradient ascent of the
// discretized functional on the constraint surface H_nu(u) = 1, multi-start.
MaximizerResult solve_subcritical_oracle(const Params& params, double eps,
                                         const GridPtr& grid, SolverOptions opts = {});

}  // namespace tmfrac
