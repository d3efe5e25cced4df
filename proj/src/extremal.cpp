#include "tmfrac/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tmfrac/eigen.hpp"
#include "tmfrac/errors.hpp"

namespace tmfrac {

namespace {

constexpr double kExpCap = 700.0;

double positive_pow(double u, double e) {
  // 0^e := 0 for e > 0 (continuous extension at u = 0).
  if (u <= 0.0) {
    return 0.0;
  }
  if (e == 1.0) {
    return u;
  }
  if (e == 2.0) {
    return u * u;
  }
  return std::pow(u, e);
}

void check_exponent(double arg, const RadialGrid& grid, int node) {
  if (arg > kExpCap) {
    throw FunctionalOverflow(
        "exponential overflow: mu |u|^{p/(p-1)} = " + std::to_string(arg) + " at node " +
            std::to_string(node) + " (r = " + std::to_string(grid.node(node)) + ")",
        node, grid.node(node));
  }
}

struct HNorm {
  double lp_p;    // ||u||_{L^p_theta}^p
  double grad_p;  // ||u'||_{L^p_alpha}^p
  double h;       // H_nu(u)
};

HNorm h_norm(const RadialGrid& grid, const Params& params, const std::vector<double>& values,
             const std::vector<double>& derivative, const std::vector<double>& w_theta,
             const std::vector<double>& w_alpha) {
  HNorm out{0.0, 0.0, 0.0};
  for (size_t i = 0; i < values.size(); ++i) {
    out.lp_p += w_theta[i] * positive_pow(std::abs(values[i]), params.p);
    out.grad_p += w_alpha[i] * positive_pow(std::abs(derivative[i]), params.p);
  }
  (void)grid;
  const double rad = std::max(out.grad_p - params.nu * out.lp_p, 0.0);
  out.h = std::pow(rad, 1.0 / params.p);
  return out;
}

struct MapEval {
  std::vector<double> Tu;
  std::vector<double> G;  // -T(u)' = G
  double lambda;
};

MapEval apply_map(const RadialGrid& grid, const Params& params, double mu_eps,
                  const std::vector<double>& values, const std::vector<double>& w_theta) {
  const int n = grid.size();
  const double p = params.p;
  const double q = params.conj();
  const double inv_pm1 = 1.0 / (p - 1.0);
  const double w_a = omega(params.alpha());

  double lambda = 0.0;
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = std::max(values[static_cast<size_t>(i)], 0.0);
    const double uq = positive_pow(u, q);
    const double arg = mu_eps * uq;
    check_exponent(arg, grid, i);
    lambda += w_theta[static_cast<size_t>(i)] * std::exp(arg) * uq;
    w[static_cast<size_t>(i)] = std::exp(arg) * positive_pow(u, inv_pm1);
  }
  if (!(lambda > 0.0)) {
    throw std::runtime_error("solve_subcritical: Lagrange normalization vanished");
  }
  for (int i = 0; i < n; ++i) {
    const double u = std::max(values[static_cast<size_t>(i)], 0.0);
    w[static_cast<size_t>(i)] =
        w[static_cast<size_t>(i)] / lambda + params.nu * positive_pow(u, p - 1.0);
  }

  const auto inner = cumulative_integral(grid, w, params.theta);
  MapEval out;
  out.lambda = lambda;
  out.G.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = grid.node(i);
    const double base = inner[static_cast<size_t>(i)] / (w_a * std::pow(r, params.alpha()));
    out.G[static_cast<size_t>(i)] = std::pow(std::max(base, 0.0), inv_pm1);
  }
  out.Tu.assign(static_cast<size_t>(n), 0.0);
  for (int i = n - 2; i >= 0; --i) {
    const double h = grid.node(i + 1) - grid.node(i);
    out.Tu[static_cast<size_t>(i)] =
        out.Tu[static_cast<size_t>(i + 1)] +
        0.5 * h * (out.G[static_cast<size_t>(i)] + out.G[static_cast<size_t>(i + 1)]);
  }
  return out;
}

void validate_inputs(const Params& params, double eps, const GridPtr& grid,
                     SolverOptions& opts) {
  params.validate();
  const double mu = params.mu();
  if (!(eps > 0.0 && eps < mu)) {
    throw std::invalid_argument("solver: need 0 < eps < mu");
  }
  if (eps < 0.02 * mu && !opts.allow_small_eps) {
    throw std::invalid_argument(
        "solver: eps below the 0.02 mu floor; near-critical concentration outruns the "
        "grid (set allow_small_eps to override)");
  }
  if (params.nu > 0.0) {
    if (opts.lambda_theta <= 0.0) {
      opts.lambda_theta = principal_eigenvalue(params, grid).lambda;
    }
    if (!(params.nu < opts.lambda_theta)) {
      throw std::invalid_argument("solver: nu must be below lambda_{alpha,theta}");
    }
  }
}

std::vector<double> tent_start(const RadialGrid& grid) {
  std::vector<double> u(static_cast<size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    u[static_cast<size_t>(i)] = 1.0 - grid.node(i) / grid.radius();
  }
  return u;
}

}  // namespace

double moser_functional(const RadialFunction& u, double mu, const Params& params) {
  params.validate();
  const double q = params.conj();
  const auto w_theta = moment_weights(*u.grid, params.theta);
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double arg = mu * std::pow(std::abs(u.values[static_cast<size_t>(i)]), q);
    check_exponent(arg, *u.grid, i);
    sum += w_theta[static_cast<size_t>(i)] * std::exp(arg);
  }
  return sum;
}

double lagrange_lambda(const RadialFunction& u, double mu, const Params& params) {
  params.validate();
  const double q = params.conj();
  const auto w_theta = moment_weights(*u.grid, params.theta);
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double uq = positive_pow(std::max(u.values[static_cast<size_t>(i)], 0.0), q);
    const double arg = mu * uq;
    check_exponent(arg, *u.grid, i);
    sum += w_theta[static_cast<size_t>(i)] * std::exp(arg) * uq;
  }
  return sum;
}

std::vector<double> euler_lagrange_rhs(const RadialFunction& u, double mu_eps,
                                       const Params& params, double lambda) {
  const int n = u.grid->size();
  const double p = params.p;
  const double q = params.conj();
  const double inv_pm1 = 1.0 / (p - 1.0);
  const double w_a = omega(params.alpha());
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double uv = std::max(u.values[static_cast<size_t>(i)], 0.0);
    const double arg = mu_eps * positive_pow(uv, q);
    check_exponent(arg, *u.grid, i);
    w[static_cast<size_t>(i)] =
        std::exp(arg) * positive_pow(uv, inv_pm1) / lambda + params.nu * positive_pow(uv, p - 1.0);
  }
  const auto inner = cumulative_integral(*u.grid, w, params.theta);
  std::vector<double> rhs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = u.grid->node(i);
    rhs[static_cast<size_t>(i)] = std::pow(
        std::max(inner[static_cast<size_t>(i)] / (w_a * std::pow(r, params.alpha())), 0.0),
        inv_pm1);
  }
  return rhs;
}

MaximizerResult solve_subcritical(const Params& params, double eps, const GridPtr& grid,
                                  SolverOptions opts) {
  validate_inputs(params, eps, grid, opts);
  const double mu_eps = params.mu() - eps;
  const int n = grid->size();
  const auto w_theta = moment_weights(*grid, params.theta);
  const auto w_alpha = moment_weights(*grid, params.alpha());

  std::vector<double> u = tent_start(*grid);
  std::vector<double> d(static_cast<size_t>(n), -1.0 / grid->radius());
  {
    const double s = 1.0 / h_norm(*grid, params, u, d, w_theta, w_alpha).h;
    for (int i = 0; i < n; ++i) {
      u[static_cast<size_t>(i)] *= s;
      d[static_cast<size_t>(i)] *= s;
    }
  }

  const double tau = opts.damping;
  double change = 1.0;
  bool settled = false;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const MapEval m = apply_map(*grid, params, mu_eps, u, w_theta);
    std::vector<double> unew(static_cast<size_t>(n)), dnew(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      unew[static_cast<size_t>(i)] =
          (1.0 - tau) * u[static_cast<size_t>(i)] + tau * m.Tu[static_cast<size_t>(i)];
      dnew[static_cast<size_t>(i)] =
          (1.0 - tau) * d[static_cast<size_t>(i)] - tau * m.G[static_cast<size_t>(i)];
    }
    const double h = h_norm(*grid, params, unew, dnew, w_theta, w_alpha).h;
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw ConvergenceError("solve_subcritical: constraint norm degenerated", change, it);
    }
    const double s = 1.0 / h;
    change = 0.0;
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      unew[static_cast<size_t>(i)] *= s;
      dnew[static_cast<size_t>(i)] *= s;
      change = std::max(change,
                        std::abs(unew[static_cast<size_t>(i)] - u[static_cast<size_t>(i)]));
      scale = std::max(scale, std::abs(u[static_cast<size_t>(i)]));
    }
    u.swap(unew);
    d.swap(dnew);
    if (change < opts.tol * scale) {
      settled = true;
      ++it;
      break;
    }
  }
  if (!settled) {
    throw ConvergenceError("solve_subcritical: fixed point did not converge (last change " +
                               std::to_string(change) + ")",
                           change, it);
  }

  // Final pass: analytic derivative from the map, exact H_nu = 1 rescale.
  MaximizerResult out;
  out.mu_eps = mu_eps;
  {
    const MapEval m = apply_map(*grid, params, mu_eps, u, w_theta);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      res = std::max(res,
                     std::abs(u[static_cast<size_t>(i)] - m.Tu[static_cast<size_t>(i)]));
      d[static_cast<size_t>(i)] = -m.G[static_cast<size_t>(i)];
    }
    out.fixed_point_residual = res;
    const double s = 1.0 / h_norm(*grid, params, u, d, w_theta, w_alpha).h;
    for (int i = 0; i < n; ++i) {
      u[static_cast<size_t>(i)] *= s;
      d[static_cast<size_t>(i)] *= s;
    }
  }
  out.u.grid = grid;
  out.u.values = std::move(u);
  out.u.derivative = std::move(d);
  out.a_eps = out.u.values.front();
  out.lambda_eps = lagrange_lambda(out.u, mu_eps, params);
  out.S_eps = moser_functional(out.u, mu_eps, params);
  out.iterations = it;
  out.converged = true;
  return out;
}

// The ascent oracle works in slope space: a nonincreasing Dirichlet profile
// is parametrized by its nonnegative piecewise-linear cell slopes,
//   u_i = sum_{j >= i} s_j (r_{j+1} - r_j),  s_j >= 0,
// so monotonicity and the boundary condition are built in, and the gradient
// energy sum m_j s_j^p is diagonal in s. This is a cell-based P1 energy,
// deliberately a different discretization from the fixed-point map's nodal
// quadrature.
namespace {

struct SlopeAscent {
  const RadialGrid& grid;
  const Params& params;
  double mu_eps;
  int n;
  std::vector<double> h;        // cell widths
  std::vector<double> m_alpha;  // omega_alpha int_cell r^alpha dr
  std::vector<double> w_theta;

  SlopeAscent(const RadialGrid& g, const Params& p, double mu)
      : grid(g), params(p), mu_eps(mu), n(g.size()), w_theta(moment_weights(g, p.theta)) {
    h.resize(static_cast<size_t>(n - 1));
    m_alpha.resize(static_cast<size_t>(n - 1));
    const double wa = omega(params.alpha());
    const double e = params.alpha() + 1.0;
    for (int j = 0; j + 1 < n; ++j) {
      h[static_cast<size_t>(j)] = grid.node(j + 1) - grid.node(j);
      m_alpha[static_cast<size_t>(j)] =
          wa * (std::pow(grid.node(j + 1), e) - std::pow(grid.node(j), e)) / e;
    }
  }

  std::vector<double> to_values(const std::vector<double>& s) const {
    std::vector<double> u(static_cast<size_t>(n), 0.0);
    for (int i = n - 2; i >= 0; --i) {
      u[static_cast<size_t>(i)] =
          u[static_cast<size_t>(i + 1)] + s[static_cast<size_t>(i)] * h[static_cast<size_t>(i)];
    }
    return u;
  }

  std::vector<double> to_slopes(const std::vector<double>& values) const {
    std::vector<double> s(static_cast<size_t>(n - 1));
    for (int j = 0; j + 1 < n; ++j) {
      s[static_cast<size_t>(j)] =
          std::max((values[static_cast<size_t>(j)] - values[static_cast<size_t>(j + 1)]) /
                       h[static_cast<size_t>(j)],
                   0.0);
    }
    return s;
  }

  // H_nu^p with the cell-based gradient energy.
  double constraint(const std::vector<double>& s, const std::vector<double>& u) const {
    double grad = 0.0, mass = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
      grad += m_alpha[static_cast<size_t>(j)] * positive_pow(s[static_cast<size_t>(j)], params.p);
    }
    for (int i = 0; i < n; ++i) {
      mass += w_theta[static_cast<size_t>(i)] *
              positive_pow(u[static_cast<size_t>(i)], params.p);
    }
    return grad - params.nu * mass;
  }

  double functional(const std::vector<double>& u) const {
    const double q = params.conj();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double arg = mu_eps * positive_pow(u[static_cast<size_t>(i)], q);
      if (arg > kExpCap) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      sum += w_theta[static_cast<size_t>(i)] * std::exp(arg);
    }
    return sum;
  }

  bool normalize(std::vector<double>& s, std::vector<double>& u) const {
    for (auto& x : s) {
      x = std::max(x, 0.0);
    }
    u = to_values(s);
    const double c = constraint(s, u);
    if (!(c > 0.0)) {
      return false;
    }
    const double t = std::pow(c, -1.0 / params.p);
    for (auto& x : s) {
      x *= t;
    }
    u = to_values(s);
    return true;
  }

  // dF/ds_j = h_j * sum_{i <= j} dF/du_i (suffix-sum structure of u(s)).
  std::vector<double> functional_gradient(const std::vector<double>& u) const {
    const double q = params.conj();
    std::vector<double> gs(static_cast<size_t>(n - 1));
    double prefix = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
      const double uv = u[static_cast<size_t>(j)];
      const double arg = std::min(mu_eps * positive_pow(uv, q), kExpCap);
      prefix += w_theta[static_cast<size_t>(j)] * mu_eps * q * positive_pow(uv, q - 1.0) *
                std::exp(arg);
      gs[static_cast<size_t>(j)] = h[static_cast<size_t>(j)] * prefix;
    }
    return gs;
  }

  std::vector<double> constraint_gradient(const std::vector<double>& s,
                                          const std::vector<double>& u) const {
    std::vector<double> cs(static_cast<size_t>(n - 1));
    double prefix = 0.0;
    for (int j = 0; j + 1 < n; ++j) {
      prefix += w_theta[static_cast<size_t>(j)] * params.p *
                positive_pow(u[static_cast<size_t>(j)], params.p - 1.0);
      cs[static_cast<size_t>(j)] =
          params.p * m_alpha[static_cast<size_t>(j)] *
              std::pow(s[static_cast<size_t>(j)], params.p - 1.0) -
          params.nu * h[static_cast<size_t>(j)] * prefix;
    }
    return cs;
  }
};

}  // namespace

MaximizerResult solve_subcritical_oracle(const Params& params, double eps,
                                         const GridPtr& grid, SolverOptions opts) {
  validate_inputs(params, eps, grid, opts);
  const double mu_eps = params.mu() - eps;
  const int n = grid->size();
  const auto w_theta = moment_weights(*grid, params.theta);
  const auto w_alpha = moment_weights(*grid, params.alpha());
  const SlopeAscent engine(*grid, params, mu_eps);

  // Starts: tent profile, eigenfunction, truncated blow-up bubble.
  std::vector<std::vector<double>> starts;
  starts.push_back(tent_start(*grid));
  if (opts.n_starts >= 2) {
    Params unconstrained = params;
    unconstrained.nu = 0.0;
    starts.push_back(principal_eigenvalue(unconstrained, grid).eigenfunction.values);
  }
  if (opts.n_starts >= 3) {
    const double rho = grid->radius() / 20.0;
    const double c0 = std::pow(omega(params.theta) / (params.theta + 1.0),
                               1.0 / (params.p - 1.0));
    const double k = (params.theta + 1.0) / (params.p - 1.0);
    const double pm1_over_mu = (params.p - 1.0) / params.mu();
    auto bubble = [&](double r) {
      return pm1_over_mu * (std::log1p(c0 * std::pow(grid->radius() / rho, k)) -
                            std::log1p(c0 * std::pow(r / rho, k)));
    };
    std::vector<double> b(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      b[static_cast<size_t>(i)] = bubble(grid->node(i));
    }
    starts.push_back(std::move(b));
  }

  std::vector<double> best_u;
  double best_F = -1.0;
  int best_iters = 0;
  for (auto& start : starts) {
    std::vector<double> s = engine.to_slopes(start), u;
    if (!engine.normalize(s, u)) {
      continue;
    }
    double F = engine.functional(u);
    double step = 0.1;
    const double gain_floor = std::max(1e-13, 0.01 * opts.tol);
    int it = 0;
    int stale = 0;
    for (; it < opts.max_iter && stale < 12; ++it) {
      auto dir = engine.functional_gradient(u);
      const auto cs = engine.constraint_gradient(s, u);
      double gc = 0.0, cc = 0.0;
      for (size_t j = 0; j < dir.size(); ++j) {
        gc += dir[j] * cs[j];
        cc += cs[j] * cs[j];
      }
      const double shift = cc > 0.0 ? gc / cc : 0.0;
      double gmax = 0.0;
      for (size_t j = 0; j < dir.size(); ++j) {
        dir[j] -= shift * cs[j];
        gmax = std::max(gmax, std::abs(dir[j]));
      }
      if (gmax == 0.0) {
        break;
      }
      bool accepted = false;
      for (int back = 0; back < 60 && step > 1e-14; ++back) {
        std::vector<double> strial(s), utrial;
        for (size_t j = 0; j < strial.size(); ++j) {
          strial[j] += step * dir[j] / gmax;
        }
        if (!engine.normalize(strial, utrial)) {
          step *= 0.5;
          continue;
        }
        const double Ft = engine.functional(utrial);
        if (std::isfinite(Ft) && Ft > F) {
          const double gain = (Ft - F) / std::max(F, 1e-300);
          s = std::move(strial);
          u = std::move(utrial);
          F = Ft;
          step *= 1.4;
          accepted = true;
          stale = gain < gain_floor ? stale + 1 : 0;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        break;
      }
    }
    if (F > best_F) {
      best_F = F;
      best_u = u;
      best_iters = it;
    }
  }
  if (best_F < 0.0) {
    throw ConvergenceError("solve_subcritical_oracle: every start degenerated", 1.0, 0);
  }

  // Report in the nodal convention used everywhere else: fill derivatives by
  // the differentiation rule and rescale to H_nu = 1.
  MaximizerResult best;
  best.u.grid = grid;
  best.u.values = std::move(best_u);
  best.u.derivative = differentiate(*grid, best.u.values);
  {
    const double hh =
        h_norm(*grid, params, best.u.values, best.u.derivative, w_theta, w_alpha).h;
    for (auto& x : best.u.values) {
      x /= hh;
    }
    for (auto& x : best.u.derivative) {
      x /= hh;
    }
  }
  best.S_eps = moser_functional(best.u, mu_eps, params);
  best.iterations = best_iters;
  best.mu_eps = mu_eps;
  best.a_eps = best.u.values.front();
  best.lambda_eps = lagrange_lambda(best.u, mu_eps, params);
  {
    const MapEval m = apply_map(*grid, params, mu_eps, best.u.values, w_theta);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      res = std::max(res, std::abs(best.u.values[static_cast<size_t>(i)] -
                                   m.Tu[static_cast<size_t>(i)]));
    }
    best.fixed_point_residual = res;
  }
  best.converged = true;
  return best;
}

}  // namespace tmfrac
