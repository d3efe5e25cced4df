#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "tmfrac/eigen.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/extremal.hpp"
#include "tmfrac/quadrature.hpp"

using namespace tmfrac;

namespace {

const Params kBase{2.0, 1.0, 1.0, 0.0};

}  // namespace

TEST_CASE("moser functional values") {
  const auto grid = make_grid(4096, 1.0, 2.0, GridKind::power);
  const auto zero = sample(grid, [](double) { return 0.0; });
  CHECK(moser_functional(zero, 4.0, kBase) ==
        doctest::Approx(ball_volume(1.0, 1.0)).epsilon(1e-12));

  // Adaptive-quadrature oracle on the closed-form integrand.
  const auto tent = sample(grid, [](double r) { return 1.0 - r; });
  QuadratureOptions opts;
  const double oracle = 2.0 * integrate_adaptive(
                                  [](double r) {
                                    return std::exp(4.0 * (1.0 - r) * (1.0 - r)) * r;
                                  },
                                  0.0, 1.0, opts);
  CHECK(moser_functional(tent, 4.0, kBase) == doctest::Approx(oracle).epsilon(1e-6));

  // Monotone in mu.
  CHECK(moser_functional(tent, 3.0, kBase) <= moser_functional(tent, 4.0, kBase));

  // Overflow guard names the node.
  const auto big = sample(grid, [](double r) { return 30.0 * (1.0 - r); });
  CHECK_THROWS_AS(moser_functional(big, 4.0, kBase), FunctionalOverflow);
}

TEST_CASE("lagrange lambda values") {
  const auto grid = make_grid(4096, 1.0, 2.0, GridKind::power);
  const auto zero = sample(grid, [](double) { return 0.0; });
  CHECK(lagrange_lambda(zero, 4.0, kBase) == doctest::Approx(0.0));

  const auto tent = sample(grid, [](double r) { return 1.0 - r; });
  QuadratureOptions opts;
  const double oracle =
      2.0 * integrate_adaptive(
                [](double r) {
                  const double s = (1.0 - r) * (1.0 - r);
                  return std::exp(4.0 * s) * s * r;
                },
                0.0, 1.0, opts);
  CHECK(lagrange_lambda(tent, 4.0, kBase) == doctest::Approx(oracle).epsilon(1e-6));

  // e^t <= 1 + t e^t with t = mu u^{p/(p-1)} gives mu lambda >= F - |B_R|.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.2, 1.2);
  for (int t = 0; t < 10; ++t) {
    const double a = unif(rng);
    const auto u = sample(grid, [&](double r) { return a * (1.0 - r * r); });
    CHECK(4.0 * lagrange_lambda(u, 4.0, kBase) >=
          moser_functional(u, 4.0, kBase) - ball_volume(1.0, 1.0) - 1e-10);
  }
}

TEST_CASE("subcritical solve: fixed point vs ascent oracle, nu = 0") {
  const auto grid = make_grid(1024, 1.0, 2.0, GridKind::power);
  const double eps = 0.5 * kBase.mu();
  const auto fixed = solve_subcritical(kBase, eps, grid);
  const auto ascent = solve_subcritical_oracle(kBase, eps, grid);

  CHECK(fixed.converged);
  CHECK(fixed.S_eps >= ball_volume(1.0, 1.0));
  CHECK(std::abs(norms(fixed.u, kBase).h_nu - 1.0) <= 1e-8);
  CHECK(std::abs(norms(ascent.u, kBase).h_nu - 1.0) <= 1e-8);
  CHECK(std::abs(fixed.S_eps - ascent.S_eps) / fixed.S_eps <= 5e-3);

  // Supremum property against admissible trials.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (int t = 0; t < 10; ++t) {
    auto trial = sample(grid, [&](double r) { return 1.0 - std::pow(r, 0.5 + unif(rng)); });
    const double h = norms(trial, kBase).h_nu;
    for (auto& x : trial.values) {
      x /= h;
    }
    for (auto& x : trial.derivative) {
      x /= h;
    }
    CHECK(ascent.S_eps >= moser_functional(trial, fixed.mu_eps, kBase) - 1e-9);
  }

  // Both routes return nonincreasing profiles.
  for (size_t i = 0; i + 1 < ascent.u.values.size(); ++i) {
    CHECK(ascent.u.values[i + 1] <= ascent.u.values[i] + 1e-12);
    CHECK(fixed.u.values[i + 1] <= fixed.u.values[i] + 1e-12);
  }
  CHECK(fixed.u.values.back() == 0.0);

  // Peak derivative vanishes toward the origin.
  double dmax = 0.0;
  for (double d : fixed.u.derivative) {
    dmax = std::max(dmax, std::abs(d));
  }
  CHECK(std::abs(fixed.u.derivative.front()) <= 1e-3 * dmax);
}

TEST_CASE("subcritical solve with active nu") {
  Params params{2.0, 2.0, 1.0, 0.0};
  const auto grid = make_grid(1024, 1.0, 2.0, GridKind::power);
  const double lambda = principal_eigenvalue(params, grid).lambda;
  params.nu = 0.5 * lambda;
  SolverOptions opts;
  opts.lambda_theta = lambda;

  const double eps = 0.5 * params.mu();
  const auto fixed = solve_subcritical(params, eps, grid, opts);
  const auto ascent = solve_subcritical_oracle(params, eps, grid, opts);
  CHECK(std::abs(norms(fixed.u, params).h_nu - 1.0) <= 1e-8);
  CHECK(std::abs(fixed.S_eps - ascent.S_eps) / fixed.S_eps <= 5e-3);
  CHECK(fixed.mu_eps * fixed.lambda_eps >
        fixed.S_eps - ball_volume(params.theta, params.R));
}

TEST_CASE("S_eps is monotone as eps decreases") {
  const auto grid = make_grid(1024, 1.0, 2.0, GridKind::power);
  const double mu = kBase.mu();
  double prev = 0.0;
  for (double f : {0.8, 0.6, 0.45, 0.3}) {
    const auto res = solve_subcritical(kBase, f * mu, grid);
    CHECK(res.S_eps >= prev - 1e-9);
    prev = res.S_eps;
  }
}

TEST_CASE("nu-monotonicity of S_eps") {
  Params params = kBase;
  const auto grid = make_grid(512, 1.0, 2.0, GridKind::power);
  const double lambda = principal_eigenvalue(params, grid).lambda;
  const double eps = 0.5 * params.mu();
  double prev = 0.0;
  for (double f : {0.0, 0.2, 0.4}) {
    params.nu = f * lambda;
    SolverOptions opts;
    opts.lambda_theta = lambda;
    const auto res = solve_subcritical(params, eps, grid, opts);
    CHECK(res.S_eps >= prev - 1e-8);
    prev = res.S_eps;
  }
}

TEST_CASE("euler-lagrange residual of the converged profile") {
  const auto grid = make_grid(4096, 1.0, 2.0, GridKind::power);
  SolverOptions opts;
  opts.tol = 1e-10;
  const auto res = solve_subcritical(kBase, 0.5 * kBase.mu(), grid, opts);
  const auto rhs = euler_lagrange_rhs(res.u, res.mu_eps, kBase,
                                      lagrange_lambda(res.u, res.mu_eps, kBase));
  double umax = 0.0;
  for (double d : res.u.derivative) {
    umax = std::max(umax, std::abs(d));
  }
  double worst = 0.0;
  for (int i = 1; i + 1 < res.u.size(); ++i) {
    worst = std::max(worst, std::abs(-res.u.derivative[static_cast<size_t>(i)] -
                                     rhs[static_cast<size_t>(i)]));
  }
  CHECK(worst <= 1e-6 * umax);
}

TEST_CASE("scaling identity in R") {
  // S_eps(p, nu, theta, R) = R^{theta+1} S_eps(p, nu R^{theta+1}, theta, 1).
  const double R = 2.0;
  Params pR{2.0, 1.0, R, 0.0};
  Params p1{2.0, 1.0, 1.0, 0.0};
  const auto gridR = make_grid(1024, R, 2.0, GridKind::power);
  const auto grid1 = make_grid(1024, 1.0, 2.0, GridKind::power);
  const double lambdaR = principal_eigenvalue(pR, gridR).lambda;
  pR.nu = 0.25 * lambdaR;
  p1.nu = pR.nu * std::pow(R, 2.0);

  const double eps = 0.5 * p1.mu();  // mu is R-independent
  SolverOptions optsR;
  optsR.lambda_theta = lambdaR;
  const auto SR = solve_subcritical(pR, eps, gridR, optsR).S_eps;
  const auto S1 = solve_subcritical(p1, eps, grid1).S_eps;
  CHECK(SR == doctest::Approx(std::pow(R, 2.0) * S1).epsilon(5e-3));
}

TEST_CASE("solver input validation") {
  const auto grid = make_grid(128, 1.0, 2.0, GridKind::power);
  CHECK_THROWS_AS(solve_subcritical(kBase, -1.0, grid), std::invalid_argument);
  CHECK_THROWS_AS(solve_subcritical(kBase, 2.0 * kBase.mu(), grid), std::invalid_argument);
  // eps floor refuses near-critical solves unless overridden.
  CHECK_THROWS_AS(solve_subcritical(kBase, 0.001 * kBase.mu(), grid), std::invalid_argument);
  Params bad = kBase;
  bad.nu = 100.0;  // above lambda
  CHECK_THROWS_AS(solve_subcritical(bad, 0.5 * bad.mu(), grid), std::invalid_argument);
}
