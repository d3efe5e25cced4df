#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tmfrac/extremal.hpp"
#include "tmfrac/fracspace.hpp"

namespace tmfrac {

// Closed-form blow-up limit profile
//   psi(r) = -(p-1)/mu ln(1 + c0 r^{(theta+1)/(p-1)}),
// c0 = (omega_theta/(theta+1))^{1/(p-1)}.
struct PsiProfile {
  double mu, c0, k, pm1;  // k = (theta+1)/(p-1)
  double value(double r) const;
  double slope(double r) const;
};

PsiProfile profile_psi(const Params& params);

// int_0^infty exp((p/(p-1)) mu psi) d lambda_theta, computed by the Beta-type
// substitution s = c0 r^{(theta+1)/(p-1)} with the tail mapped by s -> 1/s.
// Equals 1 for every admissible (p, theta).
double psi_normalization(const Params& params, double rel_tol = 1e-12);

struct TruncatedEnergy {
  double value;       // int_0^L |psi'|^p d lambda_alpha
  double asymptotic;  // (p-1)/mu [ (theta+1)/(p-1) ln L + ln c0 - Psi(p) - gamma ]
  double residual;    // |value - asymptotic|, O(L^{-(theta+1)/(p-1)})
};

TruncatedEnergy psi_truncated_energy(double L, const Params& params);

struct BlowupReport {
  double eps = 0.0;
  double a_eps = 0.0;
  double r_eps = 0.0;
  double ratio = 0.0;                 // lambda_eps / a_eps^{p/(p-1)}
  double profile_distance_phi = 0.0;  // sup |phi_eps - 1| on [0, s_max]
  double profile_distance_psi = 0.0;  // sup |psi_eps - psi| on [0, s_max]
  double tail_energy = 0.0;           // int_{r0}^R |u'|^p d lambda_alpha
  double s_max = 0.0;
  double r0 = 0.0;
  bool s_max_truncated = false;  // r_eps s_max exceeded R
};

// Renormalization diagnostics of a converged subcritical maximizer.
BlowupReport rescale(const MaximizerResult& result, const Params& params,
                     double s_max = 10.0, double r0 = -1.0);

void write_csv(const std::vector<BlowupReport>& rows, std::ostream& os);

// (||u_{eps,c}'||^p, ||(u_eps - u_{eps,c})'||^p) for the truncation
// u_{eps,c} = min(u_eps, a_eps/c); the cell-split evaluation makes the two
// parts sum to the piecewise-linear gradient energy exactly.
std::pair<double, double> truncation_energies(const MaximizerResult& result, double c,
                                              const Params& params);

// int_{r0}^R |u'|^p d lambda_alpha with piecewise-linear cell gradients.
double concentration_tail(const RadialFunction& u, double r0, const Params& params);

struct AnnulusCapacity {
  double value;                             // omega_alpha (va-vb)^p / ln(b/a)^{p-1}
  std::function<double(double)> minimizer;  // log-linear through the endpoint data
};

AnnulusCapacity annulus_capacity(double a, double b, double va, double vb,
                                 const Params& params);

// Dirac-limit diagnostic of Lemma-type concentration:
// int (a_eps/lambda_eps) u^{1/(p-1)} e^{mu_eps u^{p/(p-1)}} v d lambda_theta.
double dirac_pairing(const MaximizerResult& result, const Params& params,
                     const std::function<double(double)>& v);

}  // namespace tmfrac
