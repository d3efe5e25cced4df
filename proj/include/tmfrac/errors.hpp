#pragma once

#include <stdexcept>
#include <string>

namespace tmfrac {

// Thrown when an iterative solver exhausts its iteration budget. The best
// iterate's residual is attached so callers can decide whether to accept it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_residual, int iterations)
      : std::runtime_error(what), best_residual_(best_residual), iterations_(iterations) {}
  double best_residual() const { return best_residual_; }
  int iterations() const { return iterations_; }

 private:
  double best_residual_;
  int iterations_;
};

// Thrown when an exponential integrand would overflow double range. Carries
// the offending node so diagnostics can point at the profile location.
class FunctionalOverflow : public std::runtime_error {
 public:
  FunctionalOverflow(const std::string& what, int node, double radius)
      : std::runtime_error(what), node_(node), radius_(radius) {}
  int node() const { return node_; }
  double radius() const { return radius_; }

 private:
  int node_;
  double radius_;
};

}  // namespace tmfrac
