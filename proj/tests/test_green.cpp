#include <doctest.h>

#include <cmath>

#include "tmfrac/eigen.hpp"
#include "tmfrac/green.hpp"
#include "tmfrac/specfun.hpp"

using namespace tmfrac;

namespace {

double lambda_for(const Params& params) {
  Params p0 = params;
  p0.nu = 0.0;
  // The threshold only gates admissibility; a coarse grid is plenty for the
  // descent-based p != 2 path.
  const int n = params.p == 2.0 ? 1024 : 192;
  const auto grid = make_grid(n, params.R, 1.5, GridKind::power);
  return principal_eigenvalue(p0, grid).lambda;
}

}  // namespace

TEST_CASE("nu = 0 closed form") {
  const Params params{2.0, 1.0, 1.0, 0.0};
  const auto grid = RadialGrid::logarithmic(1024, 1.0, 8.0);
  const auto res = solve_green(params, grid);

  double worst = 0.0;
  for (int i = 0; i < grid->size(); ++i) {
    worst = std::max(worst, std::abs(res.g.values[static_cast<size_t>(i)] -
                                     0.5 * std::log(1.0 / grid->node(i))));
  }
  CHECK(worst <= 1e-8);
  CHECK(res.A0_formula == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(std::abs(res.A0_fit) <= 1e-10);
  for (double s : res.sigma) {
    CHECK(std::abs(s) <= 1e-14);
  }
  for (double z : res.z.values) {
    CHECK(std::abs(z) <= 1e-10);
  }

  // R = 2: A0 = (theta+1)/mu ln 2 = ln(2)/2.
  const Params p2{2.0, 1.0, 2.0, 0.0};
  const auto res2 = solve_green(p2, RadialGrid::logarithmic(1024, 2.0, 8.0));
  CHECK(res2.A0_formula == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-10));
  CHECK(res2.A0_fit == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("A0 cross validation at nu = lambda/2") {
  Params params{2.0, 1.0, 1.0, 0.0};
  params.nu = 0.5 * lambda_for(params);
  const auto grid = RadialGrid::logarithmic(2048, 1.0, 6.0);
  GreenOptions opts;
  opts.lambda_theta = 2.0 * params.nu;
  const auto res = solve_green(params, grid, opts);
  CHECK(std::abs(res.A0_fit - res.A0_formula) <= 1e-4);
  CHECK(res.residual <= 1e-10);

  // g decreasing, g(R) = 0.
  CHECK(res.g.values.back() == doctest::Approx(0.0).epsilon(1e-12));
  for (size_t i = 0; i + 1 < res.g.values.size(); ++i) {
    CHECK(res.g.values[i + 1] <= res.g.values[i] + 1e-14);
  }
}

TEST_CASE("integrated equation residual") {
  // -omega_a r^a |g'|^{p-2} g' = 1 + nu int_0^r |g|^{p-1} d lambda_theta.
  for (double p : {2.0, 3.0}) {
    Params params{p, p - 1.0 + 0.5, 1.0, 0.0};
    params.nu = 0.4 * lambda_for(params);
    const auto grid = RadialGrid::logarithmic(1024, 1.0, 8.0);
    GreenOptions opts;
    opts.lambda_theta = params.nu / 0.4;
    const auto res = solve_green(params, grid, opts);

    std::vector<double> gp(res.g.values.size());
    for (size_t i = 0; i < gp.size(); ++i) {
      gp[i] = std::pow(std::abs(res.g.values[i]), p - 1.0);
    }
    const auto inner = cumulative_integral(*grid, gp, params.theta);
    const double wa = omega(params.alpha());
    double worst = 0.0;
    for (int i = 1; i + 1 < grid->size(); ++i) {
      const double d = res.g.derivative[static_cast<size_t>(i)];
      const double lhs = -wa * std::pow(grid->node(i), params.alpha()) *
                         std::pow(std::abs(d), p - 2.0) * d;
      const double rhs = 1.0 + params.nu * inner[static_cast<size_t>(i)];
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("picard iterates agree from two starts") {
  Params params{2.0, 1.0, 1.0, 0.0};
  params.nu = 0.5 * lambda_for(params);
  const auto grid = RadialGrid::logarithmic(1024, 1.0, 8.0);
  GreenOptions a;
  a.lambda_theta = 2.0 * params.nu;
  GreenOptions b = a;
  b.start_scale = 1.1;
  const auto ga = solve_green(params, grid, a);
  const auto gb = solve_green(params, grid, b);
  double worst = 0.0;
  for (size_t i = 0; i < ga.g.values.size(); ++i) {
    worst = std::max(worst, std::abs(ga.g.values[i] - gb.g.values[i]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("sigma vanishes at the origin and the inner integral is o(t)") {
  Params params{2.0, 1.0, 1.0, 0.0};
  params.nu = 0.5 * lambda_for(params);
  const auto grid = RadialGrid::logarithmic(1024, 1.0, 8.0);
  GreenOptions opts;
  opts.lambda_theta = 2.0 * params.nu;
  const auto res = solve_green(params, grid, opts);

  CHECK(std::abs(res.sigma.front()) <= 1e-6);
  CHECK(res.sigma_at(0.0) == 0.0);

  std::vector<double> gp(res.g.values.size());
  for (size_t i = 0; i < gp.size(); ++i) {
    gp[i] = std::abs(res.g.values[i]);  // p - 1 = 1
  }
  const auto inner = cumulative_integral(*grid, gp, params.theta);
  // I(t)/t decreasing toward 0 at the smallest nodes.
  for (int i = 0; i + 1 < 12; ++i) {
    CHECK(inner[static_cast<size_t>(i)] / grid->node(i) <=
          inner[static_cast<size_t>(i + 1)] / grid->node(i + 1) + 1e-18);
  }

  // z(0) = 0 side: z is tiny at the first node and z(r)/r decays toward the
  // origin across the resolvable decades (below ~1e-6 the subtraction
  // defining z sits at its quadrature floor).
  CHECK(std::abs(res.z.values.front()) <= 1e-9);
  double prev_ratio = 1e300;
  for (double r_target : {1e-1, 1e-2, 1e-3, 1e-4}) {
    int idx = 0;
    while (idx + 1 < grid->size() && grid->node(idx) < r_target) {
      ++idx;
    }
    const double ratio = std::abs(res.z.values[static_cast<size_t>(idx)]) / grid->node(idx);
    CHECK(ratio < prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("nu continuity toward the closed form") {
  Params params{2.0, 1.0, 1.0, 0.0};
  const double lambda = lambda_for(params);
  const auto grid = RadialGrid::logarithmic(1024, 1.0, 8.0);
  double prev = 1e300;
  for (double f : {0.1, 0.01, 0.001}) {
    params.nu = f * lambda;
    GreenOptions opts;
    opts.lambda_theta = lambda;
    const auto res = solve_green(params, grid, opts);
    double worst = 0.0;
    for (int i = 0; i < grid->size(); ++i) {
      worst = std::max(worst, std::abs(res.g.values[static_cast<size_t>(i)] -
                                       0.5 * std::log(1.0 / grid->node(i))));
    }
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("critical upper bound") {
  const Params params{2.0, 1.0, 1.0, 0.0};
  // A0 = 0, Psi(2) + gamma = 1, |B_1|_1 = 1: U = 1 + e.
  CHECK(upper_bound(params, 0.0) ==
        doctest::Approx(1.0 + 2.718281828459045).epsilon(1e-12));

  // Through the solver at nu = 0.
  const auto res = solve_green(params, RadialGrid::logarithmic(512, 1.0, 8.0));
  CHECK(res.upper_bound == doctest::Approx(1.0 + 2.718281828459045).epsilon(1e-9));

  // The |B_R| term is exactly the ball volume.
  const Params wide{2.5, 3.0, 1.7, 0.0};
  const double U = upper_bound(wide, 0.3);
  const double exp_term = std::exp(wide.mu() * 0.3 + specfun::digamma(wide.p) +
                                   specfun::euler_gamma()) *
                          ball_volume(wide.theta, 1.0);
  CHECK(U - exp_term == doctest::Approx(ball_volume(wide.theta, wide.R)).epsilon(1e-12));

  // Strictly increasing in A0.
  CHECK(upper_bound(params, 0.2) > upper_bound(params, 0.1));
}

TEST_CASE("solver rejects nu at or above lambda") {
  Params params{2.0, 1.0, 1.0, 0.0};
  params.nu = 1.01 * lambda_for(params);
  const auto grid = RadialGrid::logarithmic(256, 1.0, 8.0);
  CHECK_THROWS_AS(solve_green(params, grid), std::invalid_argument);
}
