#include "tmfrac/green.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tmfrac/eigen.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/specfun.hpp"

namespace tmfrac {

namespace {

// F_i = (1 + nu int_0^{r_i} |g|^{p-1} d lambda_theta)^{1/(p-1)}.
std::vector<double> constraint_factor(const RadialGrid& grid, const Params& params,
                                      const std::vector<double>& g) {
  const int n = grid.size();
  std::vector<double> f(static_cast<size_t>(n), 1.0);
  if (params.nu == 0.0) {
    return f;
  }
  std::vector<double> gp(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    gp[static_cast<size_t>(i)] =
        std::pow(std::abs(g[static_cast<size_t>(i)]), params.p - 1.0);
  }
  const auto inner = cumulative_integral(grid, gp, params.theta);
  for (int i = 0; i < n; ++i) {
    f[static_cast<size_t>(i)] =
        std::pow(1.0 + params.nu * std::max(inner[static_cast<size_t>(i)], 0.0),
                 1.0 / (params.p - 1.0));
  }
  return f;
}

// T(g)(r_i) = (theta+1)/mu int_{r_i}^R F(t)/t dt, trapezoid in ln t so the
// nu = 0 case (F = 1) integrates exactly on any grid.
std::vector<double> picard_step(const RadialGrid& grid, const Params& params,
                                const std::vector<double>& F) {
  const int n = grid.size();
  const double scale = (params.theta + 1.0) / params.mu();
  std::vector<double> Tg(static_cast<size_t>(n), 0.0);
  for (int i = n - 2; i >= 0; --i) {
    const double dlog = std::log(grid.node(i + 1) / grid.node(i));
    Tg[static_cast<size_t>(i)] =
        Tg[static_cast<size_t>(i + 1)] +
        scale * 0.5 * (F[static_cast<size_t>(i)] + F[static_cast<size_t>(i + 1)]) * dlog;
  }
  return Tg;
}

}  // namespace

double GreenResult::sigma_at(double r) const {
  const auto& nodes = g.grid->nodes();
  if (r <= 0.0) {
    return 0.0;
  }
  if (r <= nodes.front()) {
    // sigma -> 0 as t -> 0; interpolate linearly between (0, 0) and the
    // first node.
    return sigma.front() * r / nodes.front();
  }
  if (r >= nodes.back()) {
    return sigma.back();
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  const size_t i = static_cast<size_t>(it - nodes.begin()) - 1;
  const double t = std::log(r / nodes[i]) / std::log(nodes[i + 1] / nodes[i]);
  return (1.0 - t) * sigma[i] + t * sigma[i + 1];
}

GreenResult solve_green(const Params& params, const GridPtr& grid, GreenOptions opts) {
  params.validate();
  if (params.nu > 0.0) {
    double lambda = opts.lambda_theta;
    if (lambda <= 0.0) {
      lambda = principal_eigenvalue(params, grid).lambda;
    }
    if (!(params.nu < lambda)) {
      throw std::invalid_argument("solve_green: nu must be below lambda_{alpha,theta}");
    }
  }
  const int n = grid->size();
  const double R = grid->radius();
  const double scale = (params.theta + 1.0) / params.mu();

  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<size_t>(i)] = opts.start_scale * scale * std::log(R / grid->node(i));
  }

  double residual = 0.0;
  int it = 0;
  const double tau = opts.damping;
  for (; it < opts.max_iter; ++it) {
    const auto F = constraint_factor(*grid, params, g);
    const auto Tg = picard_step(*grid, params, F);
    residual = 0.0;
    for (int i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(Tg[static_cast<size_t>(i)] -
                                             g[static_cast<size_t>(i)]));
      g[static_cast<size_t>(i)] =
          (1.0 - tau) * g[static_cast<size_t>(i)] + tau * Tg[static_cast<size_t>(i)];
    }
    if (residual < opts.tol) {
      ++it;
      break;
    }
  }
  if (residual >= opts.tol) {
    throw ConvergenceError("solve_green: Picard iteration did not converge", residual, it);
  }

  GreenResult out;
  out.iterations = it;
  out.residual = residual;
  out.g.grid = grid;
  out.g.values = g;

  const auto F = constraint_factor(*grid, params, g);
  out.g.derivative.resize(static_cast<size_t>(n));
  out.sigma.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = grid->node(i);
    out.g.derivative[static_cast<size_t>(i)] = -scale * F[static_cast<size_t>(i)] / r;
    out.sigma[static_cast<size_t>(i)] = (F[static_cast<size_t>(i)] - 1.0) / r;
  }

  const auto est = extract_A0(out.g, params);
  out.A0_fit = est.fit;
  out.A0_formula = est.formula;
  out.fit_deviation = est.deviation;
  out.A0 = est.formula;
  out.upper_bound = upper_bound(params, out.A0);

  out.z.grid = grid;
  out.z.values.resize(static_cast<size_t>(n));
  out.z.derivative.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = grid->node(i);
    out.z.values[static_cast<size_t>(i)] =
        g[static_cast<size_t>(i)] + scale * std::log(r) - out.A0;
    out.z.derivative[static_cast<size_t>(i)] = -scale * out.sigma[static_cast<size_t>(i)];
  }
  return out;
}

A0Estimate extract_A0(const RadialFunction& g, const Params& params) {
  params.validate();
  const auto& r = g.grid->nodes();
  const int n = g.grid->size();
  const double scale = (params.theta + 1.0) / params.mu();

  // Fit route: g + (theta+1)/mu ln r over the smallest decade of the grid.
  double sum = 0.0, sum2 = 0.0;
  int count = 0;
  const double cutoff = 10.0 * r.front();
  for (int i = 0; i < n && r[static_cast<size_t>(i)] <= cutoff; ++i) {
    const double v = g.values[static_cast<size_t>(i)] + scale * std::log(r[static_cast<size_t>(i)]);
    sum += v;
    sum2 += v * v;
    ++count;
  }
  if (count == 0) {
    throw std::runtime_error("extract_A0: no nodes in the smallest decade");
  }
  const double fit = sum / count;
  const double deviation = std::sqrt(std::max(sum2 / count - fit * fit, 0.0));

  // Formula route: A0 = (theta+1)/mu (int_0^R sigma + ln R). The sigma
  // integral uses the same ln-space trapezoid as the Picard step, so the
  // remainder z = g + (theta+1)/mu ln r - A0 vanishes at the origin to the
  // accuracy of the tiny (0, r_1] segment rather than to a quadrature
  // mismatch between the two routes.
  const auto F = constraint_factor(*g.grid, params, g.values);
  double integral = 0.5 * (F.front() - 1.0);  // triangle on (0, r_1], sigma(0) = 0
  for (int i = 0; i + 1 < n; ++i) {
    integral += 0.5 * ((F[static_cast<size_t>(i)] - 1.0) + (F[static_cast<size_t>(i + 1)] - 1.0)) *
                std::log(r[static_cast<size_t>(i + 1)] / r[static_cast<size_t>(i)]);
  }
  const double formula = scale * (integral + std::log(g.grid->radius()));
  return A0Estimate{fit, formula, deviation};
}

double upper_bound(const Params& params, double A0) {
  params.validate();
  return ball_volume(params.theta, params.R) +
         std::exp(params.mu() * A0 + specfun::digamma(params.p) + specfun::euler_gamma()) *
             ball_volume(params.theta, 1.0);
}

}  // namespace tmfrac
