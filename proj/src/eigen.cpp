#include "tmfrac/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "tmfrac/errors.hpp"

namespace tmfrac {

namespace {

struct DiffStencil {
  int col[3];
  double coef[3];
};

// Rows of the three-point differentiation matrix, so both D and D^T apply.
std::vector<DiffStencil> build_stencils(const RadialGrid& grid) {
  const auto& r = grid.nodes();
  const int n = grid.size();
  std::vector<DiffStencil> rows(static_cast<size_t>(n));
  auto fill = [&](int row, int ia, int ib, int ic) {
    const double a = r[static_cast<size_t>(ia)], b = r[static_cast<size_t>(ib)],
                 c = r[static_cast<size_t>(ic)];
    const double x = r[static_cast<size_t>(row)];
    rows[static_cast<size_t>(row)] = DiffStencil{
        {ia, ib, ic},
        {(2.0 * x - b - c) / ((a - b) * (a - c)), (2.0 * x - a - c) / ((b - a) * (b - c)),
         (2.0 * x - a - b) / ((c - a) * (c - b))}};
  };
  fill(0, 0, 1, 2);
  for (int i = 1; i + 1 < n; ++i) {
    fill(i, i - 1, i, i + 1);
  }
  fill(n - 1, n - 3, n - 2, n - 1);
  return rows;
}

std::vector<double> apply(const std::vector<DiffStencil>& rows,
                          const std::vector<double>& u) {
  std::vector<double> out(u.size(), 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    out[i] = s.coef[0] * u[static_cast<size_t>(s.col[0])] +
             s.coef[1] * u[static_cast<size_t>(s.col[1])] +
             s.coef[2] * u[static_cast<size_t>(s.col[2])];
  }
  return out;
}

std::vector<double> apply_transpose(const std::vector<DiffStencil>& rows,
                                    const std::vector<double>& y) {
  std::vector<double> out(y.size(), 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    for (int k = 0; k < 3; ++k) {
      out[static_cast<size_t>(s.col[k])] += s.coef[k] * y[i];
    }
  }
  return out;
}

struct Quotient {
  const RadialGrid& grid;
  double p;
  std::vector<double> w_theta, w_alpha;
  std::vector<DiffStencil> rows;

  Quotient(const RadialGrid& g, const Params& params)
      : grid(g),
        p(params.p),
        w_theta(moment_weights(g, params.theta)),
        w_alpha(moment_weights(g, params.alpha())),
        rows(build_stencils(g)) {}

  double mass(const std::vector<double>& u) const {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
      s += w_theta[i] * std::pow(std::abs(u[i]), p);
    }
    return s;
  }

  double energy(const std::vector<double>& u) const {
    const auto d = apply(rows, u);
    double s = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
      s += w_alpha[i] * std::pow(std::abs(d[i]), p);
    }
    return s;
  }

  double value(const std::vector<double>& u) const { return energy(u) / mass(u); }

  // d/du of the energy: p D^T (W_alpha |Du|^{p-2} Du).
  std::vector<double> energy_gradient(const std::vector<double>& u) const {
    auto d = apply(rows, u);
    for (size_t i = 0; i < d.size(); ++i) {
      d[i] = w_alpha[i] * p * std::pow(std::abs(d[i]), p - 2.0) * d[i];
    }
    return apply_transpose(rows, d);
  }

  std::vector<double> mass_gradient(const std::vector<double>& u) const {
    std::vector<double> g(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
      g[i] = w_theta[i] * p * std::pow(std::abs(u[i]), p - 2.0) * u[i];
    }
    return g;
  }
};

void project_admissible(std::vector<double>& u) {
  for (double& x : u) {
    x = std::max(x, 0.0);
  }
  u.back() = 0.0;
}

void normalize_mass(const Quotient& q, std::vector<double>& u) {
  const double m = q.mass(u);
  if (!(m > 0.0)) {
    throw std::runtime_error("principal_eigenvalue: degenerate trial profile");
  }
  const double s = std::pow(m, -1.0 / q.p);
  for (double& x : u) {
    x *= s;
  }
}

struct DescentOutcome {
  std::vector<double> u;
  double lambda = 0.0;
  int iterations = 0;
  double residual = 1.0;
  bool converged = false;
};

DescentOutcome descend(const Quotient& q, std::vector<double> u, const EigenOptions& opts) {
  project_admissible(u);
  normalize_mass(q, u);
  double lambda = q.value(u);
  double step = 0.1;
  double residual = 1.0;
  bool stationary = false;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const auto ge = q.energy_gradient(u);
    const auto gm = q.mass_gradient(u);
    // Gradient of E/M at M = 1 is grad E - lambda grad M.
    std::vector<double> dir(u.size());
    double gnorm = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
      dir[i] = ge[i] - lambda * gm[i];
      gnorm = std::max(gnorm, std::abs(dir[i]));
    }
    dir.back() = 0.0;
    if (gnorm == 0.0) {
      residual = 0.0;
      break;
    }
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      std::vector<double> trial(u.size());
      for (size_t i = 0; i < u.size(); ++i) {
        trial[i] = u[i] - step * dir[i] / gnorm;
      }
      project_admissible(trial);
      normalize_mass(q, trial);
      const double lt = q.value(trial);
      if (lt < lambda) {
        residual = (lambda - lt) / std::max(lambda, 1e-300);
        u = std::move(trial);
        lambda = lt;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      stationary = true;  // no improving step at machine scale
      break;
    }
    if (residual < opts.tol) {
      break;
    }
  }
  return DescentOutcome{std::move(u), lambda, it, residual,
                        residual < opts.tol || stationary};
}

// Thomas algorithm for a tridiagonal SPD system.
std::vector<double> solve_tridiagonal(std::vector<double> diag, std::vector<double> off,
                                      std::vector<double> rhs) {
  const size_t n = diag.size();
  for (size_t i = 1; i < n; ++i) {
    const double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (size_t i = n - 1; i-- > 0;) {
    x[i] = (rhs[i] - off[i] * x[i + 1]) / diag[i];
  }
  return x;
}

// Inverse-power iteration on the P1 stiffness / lumped mass pencil (p = 2).
DescentOutcome inverse_power(const RadialGrid& grid, const Params& params,
                             const EigenOptions& opts) {
  const auto& r = grid.nodes();
  const int n = grid.size();
  const int m = n - 1;  // interior unknowns, Dirichlet at r_N = R
  const double w_alpha = omega(params.alpha());
  std::vector<double> diag(static_cast<size_t>(m), 0.0), off(static_cast<size_t>(m), 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double x0 = r[static_cast<size_t>(i)], x1 = r[static_cast<size_t>(i + 1)];
    const double cell = w_alpha *
                        (std::pow(x1, params.alpha() + 1.0) - std::pow(x0, params.alpha() + 1.0)) /
                        (params.alpha() + 1.0);
    const double k = cell / ((x1 - x0) * (x1 - x0));
    diag[static_cast<size_t>(i)] += k;
    if (i + 1 < m) {
      diag[static_cast<size_t>(i + 1)] += k;
      off[static_cast<size_t>(i)] -= k;
    }
  }
  const auto w_theta = moment_weights(grid, params.theta);

  std::vector<double> u(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    u[static_cast<size_t>(i)] = 1.0 - r[static_cast<size_t>(i)] / grid.radius();
  }
  double lambda = 0.0, residual = 1.0;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    std::vector<double> rhs(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      rhs[static_cast<size_t>(i)] = w_theta[static_cast<size_t>(i)] * u[static_cast<size_t>(i)];
    }
    auto y = solve_tridiagonal(diag, off, rhs);
    double norm = 0.0;
    for (int i = 0; i < m; ++i) {
      norm += w_theta[static_cast<size_t>(i)] * y[static_cast<size_t>(i)] *
              y[static_cast<size_t>(i)];
    }
    norm = std::sqrt(norm);
    for (double& x : y) {
      x /= norm;
    }
    // Rayleigh quotient in the same pencil.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      double au = diag[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
      if (i > 0) {
        au += off[static_cast<size_t>(i - 1)] * y[static_cast<size_t>(i - 1)];
      }
      if (i + 1 < m) {
        au += off[static_cast<size_t>(i)] * y[static_cast<size_t>(i + 1)];
      }
      num += y[static_cast<size_t>(i)] * au;
      den += w_theta[static_cast<size_t>(i)] * y[static_cast<size_t>(i)] *
             y[static_cast<size_t>(i)];
    }
    const double next = num / den;
    residual = std::abs(next - lambda) / std::max(next, 1e-300);
    lambda = next;
    u = std::move(y);
    if (residual < opts.tol && it > 2) {
      ++it;
      break;
    }
  }
  std::vector<double> full(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    full[static_cast<size_t>(i)] = std::abs(u[static_cast<size_t>(i)]);
  }
  return DescentOutcome{std::move(full), lambda, it, residual, residual < opts.tol};
}

}  // namespace

double rayleigh_quotient(const RadialFunction& u, const Params& params) {
  Params p0 = params;  // the quotient does not involve nu
  p0.nu = 0.0;
  const NormReport n = norms(u, p0);
  return std::pow(n.grad_lp_alpha / n.lp_theta, params.p);
}

EigenResult principal_eigenvalue(const Params& params, const GridPtr& grid,
                                 EigenOptions opts) {
  params.validate();
  const Quotient q(*grid, params);

  DescentOutcome best;
  if (params.p == 2.0) {
    best = inverse_power(*grid, params, opts);
  } else {
    const auto& r = grid->nodes();
    std::vector<std::vector<double>> starts;
    std::vector<double> tent(r.size());
    for (size_t i = 0; i < r.size(); ++i) {
      tent[i] = 1.0 - r[i] / grid->radius();
    }
    starts.push_back(tent);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    for (int s = 0; s < opts.n_starts; ++s) {
      std::vector<double> u(r.size());
      for (size_t i = 0; i < r.size(); ++i) {
        u[i] = unif(rng) * (1.0 - r[i] / grid->radius());
      }
      starts.push_back(std::move(u));
    }
    bool have = false;
    for (auto& s : starts) {
      auto out = descend(q, std::move(s), opts);
      if (!have || out.lambda < best.lambda) {
        best = std::move(out);
        have = true;
      }
    }
  }
  if (!best.converged) {
    throw ConvergenceError("principal_eigenvalue: iteration did not converge", best.residual,
                           best.iterations);
  }

  RadialFunction eig;
  eig.grid = grid;
  eig.values = std::move(best.u);
  fill_derivative(eig);
  // Normalize ||u||_{L^p_theta} = 1 in the nodal convention.
  {
    std::vector<double> up(eig.values.size());
    for (size_t i = 0; i < eig.values.size(); ++i) {
      up[i] = std::pow(std::abs(eig.values[i]), params.p);
    }
    const double mass = integrate_samples(*grid, up, params.theta);
    const double s = std::pow(mass, -1.0 / params.p);
    for (auto& x : eig.values) {
      x *= s;
    }
    for (auto& x : eig.derivative) {
      x *= s;
    }
  }

  EigenResult out;
  out.eigenfunction = std::move(eig);
  out.lambda = rayleigh_quotient(out.eigenfunction, params);
  out.iterations = best.iterations;
  out.residual = best.residual;
  return out;
}

}  // namespace tmfrac
