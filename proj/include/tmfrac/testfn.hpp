#pragma once

#include <iosfwd>
#include <vector>

#include "tmfrac/fracspace.hpp"
#include "tmfrac/green.hpp"

namespace tmfrac {

struct TestFunctionResult {
  RadialFunction v;
  double eps = 0.0;
  double L = 0.0;           // -ln eps
  double Lambda_eps = 0.0;  // gluing constant
  double c = 0.0;           // normalization solving H_nu(v) = 1
  double c_asymptotic = 0.0;
  double h_residual = 0.0;  // |H_nu(v) - 1| after the scalar solve
  double functional = 0.0;  // moser functional at mu_{alpha,theta}
  double upper_bound = 0.0;
  double margin = 0.0;      // functional - upper_bound
};

// Assembles the three-branch family: inner bubble on [0, L eps], cutoff
// transition g - phi z on [L eps, 2 L eps], outer g/c^{1/(p-1)} on
// [2 L eps, R]. The gluing constant makes the family continuous at L eps and
// c is solved by bisection so that H_nu(v) = 1 on the grid.
TestFunctionResult build_test_function(const Params& params, double eps,
                                       const GreenResult& green);

struct LowerBoundRow {
  double eps = 0.0;
  double L = 0.0;
  double c = 0.0;
  double c_asym = 0.0;
  double h_residual = 0.0;
  double functional = 0.0;
  double upper_bound = 0.0;
  double margin = 0.0;
  bool rejected = false;  // precondition L eps < R/4 failed
};

// Builds v_eps for each entry of a decreasing eps list and tabulates the
// functional against the critical upper bound.
std::vector<LowerBoundRow> lower_bound_check(const Params& params,
                                             const std::vector<double>& eps_list,
                                             const GreenResult& green);

void write_csv(const std::vector<LowerBoundRow>& rows, std::ostream& os);

}  // namespace tmfrac
