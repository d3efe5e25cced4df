#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tmfrac {

// omega_theta = 2 pi^{theta/2} / Gamma(theta/2), the paper's fractional
// volume constant. Note this is indexed by the fractional dimension itself,
// not by an ambient integer dimension minus one.
double omega(double theta);

// |B_R|_theta = omega_theta R^{theta+1} / (theta+1).
double ball_volume(double theta, double R);

// Problem parameters in the Trudinger-Moser case alpha = p - 1, R finite.
struct Params {
  double p = 2.0;      // exponent, >= 2
  double theta = 1.0;  // weight exponent, >= alpha
  double R = 1.0;      // domain radius, > 0
  double nu = 0.0;     // constraint parameter, >= 0 (admissibility nu < lambda
                       // is checked by the solvers that need it)

  double alpha() const { return p - 1.0; }
  double conj() const { return p / (p - 1.0); }  // p/(p-1)
  double mu() const;                             // (theta+1) omega_alpha^{1/alpha}
  void validate() const;                         // throws std::invalid_argument
};

enum class GridKind { power, log };

// Strictly increasing mesh 0 < r_1 < ... < r_N = R on (0, R]. There is no
// node at r = 0; the measure r^theta dr is integrable there and the first
// cell is handled by exact moments of the linear extension.
class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> power(int n, double R, double grading);
  static std::shared_ptr<const RadialGrid> logarithmic(int n, double R, double decades);
  static std::shared_ptr<const RadialGrid> from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double radius() const { return nodes_.back(); }

 private:
  explicit RadialGrid(std::vector<double> nodes);
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int n, double R, double grading, GridKind kind, double decades = 8.0);

// Sampled radial profile. `derivative` is filled by the three-point
// nonuniform rule by default; solvers that know the derivative in closed
// form store that instead.
struct RadialFunction {
  GridPtr grid;
  std::vector<double> values;
  std::vector<double> derivative;

  int size() const { return static_cast<int>(values.size()); }
};

RadialFunction sample(const GridPtr& grid, const std::function<double(double)>& f);
RadialFunction sample(const GridPtr& grid, const std::function<double(double)>& f,
                      const std::function<double(double)>& df);

// Three-point nonuniform differences, second order at both ends.
std::vector<double> differentiate(const RadialGrid& grid, std::span<const double> values);
void fill_derivative(RadialFunction& u);

// Transpose of the differentiation matrix, for chain-rule gradients of
// functionals of the nodal derivative.
std::vector<double> differentiate_transpose(const RadialGrid& grid,
                                            std::span<const double> y);

// Nodal weights W with sum_i W_i f_i = int_0^R PL(f)(r) r^w omega_w dr,
// where PL(f) is the piecewise-linear interpolant and the first cell
// (0, r_1] carries the linear extension through the first two nodes.
std::vector<double> moment_weights(const RadialGrid& grid, double weight_exponent);

// Weighted integrals of sampled data against d lambda_w = omega_w r^w dr.
double integrate_samples(const RadialGrid& grid, std::span<const double> f,
                         double weight_exponent);
double integrate_samples(const RadialGrid& grid, std::span<const double> f,
                         double weight_exponent, double a, double b);

// Cumulative I_i = int_0^{r_i} PL(f) d lambda_w, one entry per node.
std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f,
                                        double weight_exponent);

// Adaptive quadrature of a closed-form evaluator against d lambda_w.
double integrate(const std::function<double(double)>& f, double weight_exponent, double a,
                 double b, double rel_tol = 1e-12);

double integrate(const RadialFunction& f, double weight_exponent);
double integrate(const RadialFunction& f, double weight_exponent, double a, double b);

struct NormReport {
  double lp_theta;       // ||u||_{L^p_theta}
  double grad_lp_alpha;  // ||u'||_{L^p_alpha}
  double h_nu;           // (||u'||^p - nu ||u||^p)^{1/p}
  double p_h;            // (1 - h_nu^p)^{-1/(p-1)}, +inf at h_nu = 1
};

NormReport norms(const RadialFunction& u, const Params& params);

// v = (1 + nu ||u||_{L^p_theta}^p)^{1/p} u, admissible (H_nu(v) <= 1)
// whenever ||u'||_{L^p_alpha} <= 1.
RadialFunction tintarev_lift(const RadialFunction& u, const Params& params);

// CSV serialization with header "r,u,du", full-precision scientific notation.
void write_csv(const RadialFunction& u, std::ostream& os);
void write_csv(const RadialFunction& u, const std::string& path);
RadialFunction read_csv(std::istream& is);

// Fritsch-Carlson monotone cubic interpolation; preserves monotone data.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

 private:
  std::vector<double> x_, y_, slope_;
};

}  // namespace tmfrac
