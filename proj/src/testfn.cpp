#include "tmfrac/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "tmfrac/blowup.hpp"
#include "tmfrac/extremal.hpp"
#include "tmfrac/specfun.hpp"

namespace tmfrac {

namespace {

// Piecewise-linear read of the Green remainder z; z(0) = 0 below the grid.
double z_at(const GreenResult& green, double r) {
  const auto& x = green.z.grid->nodes();
  const auto& y = green.z.values;
  if (r <= 0.0) {
    return 0.0;
  }
  if (r <= x.front()) {
    return y.front() * r / x.front();
  }
  if (r >= x.back()) {
    return y.back();
  }
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const size_t i = static_cast<size_t>(it - x.begin()) - 1;
  const double t = (r - x[i]) / (x[i + 1] - x[i]);
  return (1.0 - t) * y[i] + t * y[i + 1];
}

struct Assembler {
  const Params& params;
  const GreenResult& green;
  double eps, L;
  double mu, c0, k, scale;  // scale = (theta+1)/mu
  GridPtr grid;

  Assembler(const Params& p, double e, const GreenResult& gr)
      : params(p), green(gr), eps(e), L(-std::log(e)) {
    mu = params.mu();
    scale = (params.theta + 1.0) / mu;
    const PsiProfile psi = profile_psi(params);
    c0 = psi.c0;
    k = psi.k;
    build_grid();
  }

  void build_grid() {
    const double inner_lo = eps / 10.0;
    const double le = L * eps;
    std::vector<double> nodes;
    const int decades = std::max(1, static_cast<int>(std::ceil(std::log10(le / inner_lo))));
    const int n_inner = std::max(80, 50 * decades);
    for (int i = 0; i <= n_inner; ++i) {
      nodes.push_back(inner_lo * std::pow(le / inner_lo, static_cast<double>(i) / n_inner));
    }
    const int n_trans = 80;
    for (int i = 1; i <= n_trans; ++i) {
      nodes.push_back(le * (1.0 + static_cast<double>(i) / n_trans));
    }
    for (double r : green.g.grid->nodes()) {
      if (r > 2.0 * le * (1.0 + 1e-12)) {
        nodes.push_back(r);
      }
    }
    nodes.push_back(params.R);
    std::sort(nodes.begin(), nodes.end());
    std::vector<double> dedup;
    dedup.reserve(nodes.size());
    for (double r : nodes) {
      if (dedup.empty() || r > dedup.back() * (1.0 + 1e-13)) {
        dedup.push_back(r);
      }
    }
    dedup.back() = params.R;
    grid = RadialGrid::from_nodes(std::move(dedup));
  }

  double g_at(double r) const { return -scale * std::log(r) + green.A0 + z_at(green, r); }
  double g_slope(double r) const { return -scale * (1.0 / r + green.sigma_at(r)); }
  double z_slope(double r) const { return -scale * green.sigma_at(r); }

  // Cubic smoothstep cutoff: 1 at L eps, 0 at 2 L eps, |phi'| = O(1/(L eps)).
  double phi(double r) const {
    const double x = std::clamp((r - L * eps) / (L * eps), 0.0, 1.0);
    return 1.0 - x * x * (3.0 - 2.0 * x);
  }
  double phi_slope(double r) const {
    const double x = std::clamp((r - L * eps) / (L * eps), 0.0, 1.0);
    return -6.0 * x * (1.0 - x) / (L * eps);
  }

  double gluing_constant(double c) const {
    return -std::pow(c, params.conj()) +
           (params.p - 1.0) / mu * std::log1p(c0 * std::pow(L, k)) -
           scale * std::log(L * eps) + green.A0;
  }

  RadialFunction assemble(double c) const {
    const double le = L * eps;
    const double cfac = std::pow(c, -1.0 / (params.p - 1.0));
    const double lambda = gluing_constant(c);
    RadialFunction v;
    v.grid = grid;
    const int n = grid->size();
    v.values.resize(static_cast<size_t>(n));
    v.derivative.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double r = grid->node(i);
      double val, slope;
      if (r <= le) {
        const double s = c0 * std::pow(r / eps, k);
        val = c + cfac * (-(params.p - 1.0) / mu * std::log1p(s) + lambda);
        slope = r <= 0.0 ? 0.0
                         : -cfac * (params.p - 1.0) / mu * k * s / (r * (1.0 + s));
      } else if (r <= 2.0 * le) {
        val = cfac * (g_at(r) - phi(r) * z_at(green, r));
        slope = cfac * (g_slope(r) - phi_slope(r) * z_at(green, r) - phi(r) * z_slope(r));
      } else {
        val = cfac * g_at(r);
        slope = cfac * g_slope(r);
      }
      v.values[static_cast<size_t>(i)] = val;
      v.derivative[static_cast<size_t>(i)] = slope;
    }
    v.values.back() = 0.0;
    return v;
  }

  double h_of(double c) const { return norms(assemble(c), params).h_nu; }
};

}  // namespace

TestFunctionResult build_test_function(const Params& params, double eps,
                                       const GreenResult& green) {
  params.validate();
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("build_test_function: need 0 < eps < 1");
  }
  const double L = -std::log(eps);
  if (!(L * eps < params.R / 4.0)) {
    throw std::invalid_argument(
        "build_test_function: eps too large, need L eps < R/4 with L = -ln eps");
  }
  if (std::abs(green.g.grid->radius() - params.R) > 1e-12 * params.R) {
    throw std::invalid_argument("build_test_function: Green result is for a different R");
  }

  const Assembler as(params, eps, green);

  // Asymptotic normalization, used as the bisection bracket center.
  const double t = -((params.theta + 1.0) / as.mu) * std::log(eps) + green.A0 +
                   std::log(omega(params.theta) / (params.theta + 1.0)) / as.mu -
                   (params.p - 1.0) / as.mu *
                       (specfun::digamma(params.p) + specfun::euler_gamma());
  if (!(t > 0.0)) {
    throw std::invalid_argument("build_test_function: eps too large for the c-solve bracket");
  }
  const double c_asym = std::pow(t, (params.p - 1.0) / params.p);

  double lo = 0.5 * c_asym, hi = 2.0 * c_asym;
  double h_lo = as.h_of(lo), h_hi = as.h_of(hi);
  if (!(h_lo > 1.0 && h_hi < 1.0)) {
    // Robust scan for a bracket; H_nu(v(c)) is decreasing in c, so a sign
    // change of H - 1 is all we need.
    bool found = false;
    double prev_c = 0.02 * c_asym, prev_h = as.h_of(prev_c);
    for (int j = 1; j <= 64 && !found; ++j) {
      const double cj = 0.02 * c_asym * std::pow(50.0 * 4.0, static_cast<double>(j) / 64.0);
      const double hj = as.h_of(cj);
      if ((prev_h - 1.0) * (hj - 1.0) <= 0.0) {
        lo = prev_c;
        hi = cj;
        h_lo = prev_h;
        h_hi = hj;
        found = true;
      }
      prev_c = cj;
      prev_h = hj;
    }
    if (!found) {
      throw std::runtime_error(
          "build_test_function: no bracket for the c-solve in [0.02, 4] c_asym");
    }
  }

  double c = c_asym, h = as.h_of(c);
  for (int j = 0; j < 200 && std::abs(h - 1.0) > 1e-13; ++j) {
    c = 0.5 * (lo + hi);
    h = as.h_of(c);
    if (h > 1.0) {
      lo = c;
    } else {
      hi = c;
    }
    if (hi - lo < 1e-16 * c) {
      break;
    }
  }

  TestFunctionResult out;
  out.eps = eps;
  out.L = L;
  out.c = c;
  out.c_asymptotic = c_asym;
  out.Lambda_eps = as.gluing_constant(c);
  out.v = as.assemble(c);
  out.h_residual = std::abs(norms(out.v, params).h_nu - 1.0);
  out.upper_bound = green.upper_bound;
  out.functional = moser_functional(out.v, params.mu(), params);
  out.margin = out.functional - out.upper_bound;
  return out;
}

std::vector<LowerBoundRow> lower_bound_check(const Params& params,
                                             const std::vector<double>& eps_list,
                                             const GreenResult& green) {
  for (size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) {
      throw std::invalid_argument("lower_bound_check: eps_list must be strictly decreasing");
    }
  }
  std::vector<LowerBoundRow> rows;
  rows.reserve(eps_list.size());
  for (double eps : eps_list) {
    LowerBoundRow row;
    row.eps = eps;
    row.L = -std::log(eps);
    if (!(eps > 0.0 && eps < 1.0) || !(row.L * eps < params.R / 4.0)) {
      row.rejected = true;
      rows.push_back(row);
      continue;
    }
    const TestFunctionResult r = build_test_function(params, eps, green);
    row.c = r.c;
    row.c_asym = r.c_asymptotic;
    row.h_residual = r.h_residual;
    row.functional = r.functional;
    row.upper_bound = r.upper_bound;
    row.margin = r.margin;
    rows.push_back(row);
  }
  return rows;
}

void write_csv(const std::vector<LowerBoundRow>& rows, std::ostream& os) {
  os << "eps,L,c,c_asym,H_residual,functional,upper_bound,margin,rejected\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.eps, r.L, r.c, r.c_asym, r.h_residual, r.functional, r.upper_bound,
                  r.margin, r.rejected ? 1 : 0);
    os << buf;
  }
}

}  // namespace tmfrac
