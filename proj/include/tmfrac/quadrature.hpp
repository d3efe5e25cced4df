#pragma once

#include <functional>

namespace tmfrac {

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;
  int max_depth = 48;
};

// Adaptive composite Gauss-Legendre integration on a finite interval [a, b].
// Panels are bisected until two successive 15-point estimates agree.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          QuadratureOptions opts = {});

}  // namespace tmfrac
