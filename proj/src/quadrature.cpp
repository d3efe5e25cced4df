#include "tmfrac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tmfrac {

namespace {

// 15-point Gauss-Legendre rule on [-1, 1].
constexpr int kOrder = 15;
constexpr double kNode[kOrder] = {
    0.0,
    -0.2011940939974345, 0.2011940939974345,
    -0.3941513470775634, 0.3941513470775634,
    -0.5709721726085388, 0.5709721726085388,
    -0.7244177313601701, 0.7244177313601701,
    -0.8482065834104272, 0.8482065834104272,
    -0.9372733924007060, 0.9372733924007060,
    -0.9879925180204854, 0.9879925180204854,
};
constexpr double kWeight[kOrder] = {
    0.2025782419255613,
    0.1984314853271116, 0.1984314853271116,
    0.1861610000155622, 0.1861610000155622,
    0.1662692058169939, 0.1662692058169939,
    0.1395706779261543, 0.1395706779261543,
    0.1071592204671719, 0.1071592204671719,
    0.0703660474881081, 0.0703660474881081,
    0.0307532419961173, 0.0307532419961173,
};

double panel(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < kOrder; ++i) {
    sum += kWeight[i] * f(mid + half * kNode[i]);
  }
  return half * sum;
}

double refine(const std::function<double(double)>& f, double a, double b, double whole,
              double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  const double err = std::abs(left + right - whole);
  if (err <= tol || depth <= 0) {
    return left + right;
  }
  return refine(f, a, mid, left, 0.5 * tol, depth - 1) +
         refine(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          QuadratureOptions opts) {
  if (!(a <= b)) {
    throw std::invalid_argument("integrate_adaptive: interval must satisfy a <= b");
  }
  if (a == b) {
    return 0.0;
  }
  const double whole = panel(f, a, b);
  const double mid = 0.5 * (a + b);
  const double scale = std::abs(panel(f, a, mid)) + std::abs(panel(f, mid, b));
  const double tol = std::max(opts.abs_tol, opts.rel_tol * std::max(std::abs(whole), scale));
  return refine(f, a, b, whole, tol, opts.max_depth);
}

}  // namespace tmfrac
