#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "tmfrac/quadrature.hpp"
#include "tmfrac/specfun.hpp"

using namespace tmfrac;
namespace sf = tmfrac::specfun;

TEST_CASE("gamma values") {
  CHECK(sf::gamma(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(sf::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-13));
  // sqrt(pi), frozen from the quadrature oracle below.
  CHECK(sf::gamma(0.5) == doctest::Approx(1.7724538509055160).epsilon(1e-12));
  CHECK(sf::gamma(0.5) ==
        doctest::Approx(oracles::gamma_by_quadrature(0.5)).epsilon(1e-9));
  CHECK(sf::gamma(1.5) ==
        doctest::Approx(oracles::gamma_by_quadrature(1.5)).epsilon(1e-9));
  CHECK_THROWS_AS(sf::gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(sf::gamma(-1.5), std::domain_error);
}

TEST_CASE("gamma recursion property") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unif(0.1, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double x = unif(rng);
    const double lhs = sf::gamma(x + 1.0);
    CHECK(std::abs(lhs - x * sf::gamma(x)) / lhs <= 1e-11);
  }
}

TEST_CASE("digamma values") {
  const double g = oracles::euler_gamma_partial_sums();
  CHECK(sf::digamma(1.0) == doctest::Approx(-g).epsilon(1e-10));
  CHECK(sf::digamma(2.0) == doctest::Approx(1.0 - g).epsilon(1e-10));
  const double x = 1e6;
  CHECK(std::abs(sf::digamma(x) - (std::log(x) - 0.5 / x)) < 1e-6);
  CHECK_THROWS_AS(sf::digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(sf::digamma(-2.0), std::domain_error);
}

TEST_CASE("digamma recursion property") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.1, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double x = unif(rng);
    CHECK(std::abs(sf::digamma(x + 1.0) - sf::digamma(x) - 1.0 / x) <= 1e-10);
  }
}

TEST_CASE("euler gamma") {
  CHECK(sf::euler_gamma() ==
        doctest::Approx(oracles::euler_gamma_partial_sums()).epsilon(1e-10));
  CHECK(std::abs(sf::digamma(1.0) + sf::euler_gamma()) < 1e-12);
  CHECK(sf::euler_gamma() > 0.577215);
  CHECK(sf::euler_gamma() < 0.577216);
}

TEST_CASE("beta values") {
  CHECK(sf::beta(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(sf::beta(2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));  // p = 3
  CHECK(sf::beta(0.5, 0.5) ==
        doctest::Approx(3.14159265358979324).epsilon(1e-12));
  CHECK_THROWS_AS(sf::beta(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(sf::beta(1.0, -1.0), std::domain_error);
}

TEST_CASE("beta equals quadrature of the defining integral") {
  std::mt19937_64 rng(4321);
  std::uniform_real_distribution<double> unif(0.5, 5.0);
  QuadratureOptions opts;
  opts.rel_tol = 1e-12;
  for (int i = 0; i < 20; ++i) {
    const double x = unif(rng);
    const double y = unif(rng);
    // Split at s = 1; the tail maps onto [0, 1] under s -> 1/s.
    const auto head = [&](double s) {
      return std::pow(s, x - 1.0) / std::pow(1.0 + s, x + y);
    };
    const auto tail = [&](double t) {
      return std::pow(t, y - 1.0) / std::pow(1.0 + t, x + y);
    };
    const double quad = integrate_adaptive(head, 0.0, 1.0, opts) +
                        integrate_adaptive(tail, 0.0, 1.0, opts);
    CHECK(std::abs(sf::beta(x, y) - quad) / quad <= 1e-8);
  }
}

TEST_CASE("truncated beta integral closed form at x = 2") {
  for (double a : {0.3, 1.0, 7.0, 100.0}) {
    const auto tb = sf::truncated_beta_integral(a, 2.0);
    const double exact = std::log1p(a) + 1.0 / (1.0 + a) - 1.0;
    CHECK(std::abs(tb.value - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
  }
  // Residual against the asymptote is exactly 1/(1+a) at x = 2.
  const auto tb = sf::truncated_beta_integral(100.0, 2.0);
  CHECK(std::abs(tb.residual - 1.0 / 101.0) < 1e-10);
  CHECK(tb.residual <= 1.0 / 101.0 + 1e-10);
}

TEST_CASE("truncated beta integral limits and domain") {
  // Empty integral as a -> 0+.
  CHECK(sf::truncated_beta_integral(1e-12, 2.0).value ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK_THROWS_AS(sf::truncated_beta_integral(-1.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(sf::truncated_beta_integral(1.0, 1.0), std::domain_error);
}

TEST_CASE("digamma asymptotic residual decays like 1/a") {
  for (double x : {2.0, 3.0, 5.0}) {
    double prev = 1e300;
    for (double a : {10.0, 100.0, 1000.0, 10000.0}) {
      const auto tb = sf::truncated_beta_integral(a, x);
      CHECK(tb.residual < prev);
      CHECK(a * tb.residual <= 2.0 * (x - 1.0));  // limit of a*residual is x-1
      prev = tb.residual;
    }
  }
}

TEST_CASE("specfun config validation") {
  sf::SpecfunConfig bad;
  bad.rel_tol = 1e-2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.rel_tol = 1e-12;
  bad.max_terms = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
