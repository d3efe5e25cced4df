#include "tmfrac/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "tmfrac/quadrature.hpp"
#include "tmfrac/specfun.hpp"

namespace tmfrac {

namespace {

double cell_moment(double x0, double x1, double w) {
  const double e = w + 1.0;
  return (std::pow(x1, e) - std::pow(x0, e)) / e;
}

// Gradient energy of the piecewise-linear interpolant over [a, b].
double pl_gradient_energy(const RadialFunction& u, double a, double b, const Params& params) {
  const auto& r = u.grid->nodes();
  const double w_a = omega(params.alpha());
  double sum = 0.0;
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    const double y0 = std::max(a, r[i]), y1 = std::min(b, r[i + 1]);
    if (y1 <= y0) {
      continue;
    }
    const double slope = (u.values[i + 1] - u.values[i]) / (r[i + 1] - r[i]);
    sum += std::pow(std::abs(slope), params.p) * w_a * cell_moment(y0, y1, params.alpha());
  }
  return sum;
}

}  // namespace

double PsiProfile::value(double r) const {
  return -pm1 / mu * std::log1p(c0 * std::pow(r, k));
}

double PsiProfile::slope(double r) const {
  if (r <= 0.0) {
    return 0.0;
  }
  const double s = c0 * std::pow(r, k);
  return -pm1 / mu * k * s / (r * (1.0 + s));
}

PsiProfile profile_psi(const Params& params) {
  params.validate();
  PsiProfile psi;
  psi.mu = params.mu();
  psi.pm1 = params.p - 1.0;
  psi.k = (params.theta + 1.0) / (params.p - 1.0);
  psi.c0 = std::pow(omega(params.theta) / (params.theta + 1.0), 1.0 / (params.p - 1.0));
  return psi;
}

double psi_normalization(const Params& params, double rel_tol) {
  params.validate();
  const double p = params.p;
  // Substitution s = c0 r^{(theta+1)/(p-1)} reduces the integral to
  // (p-1) int_0^infty s^{p-2}/(1+s)^p ds; the tail from s = 1 maps to
  // int_0^1 (1+t)^{-p} dt under s = 1/t.
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  const auto head = [p](double s) { return std::pow(s, p - 2.0) / std::pow(1.0 + s, p); };
  const auto tail = [p](double t) { return std::pow(1.0 + t, -p); };
  return (p - 1.0) *
         (integrate_adaptive(head, 0.0, 1.0, opts) + integrate_adaptive(tail, 0.0, 1.0, opts));
}

TruncatedEnergy psi_truncated_energy(double L, const Params& params) {
  params.validate();
  if (!(L > 0.0)) {
    throw std::domain_error("psi_truncated_energy: L must be positive");
  }
  const PsiProfile psi = profile_psi(params);
  const double p = params.p;
  const double a = psi.c0 * std::pow(L, psi.k);
  const auto reduced = specfun::truncated_beta_integral(a, p);
  TruncatedEnergy out;
  out.value = (p - 1.0) / psi.mu * reduced.value;
  out.asymptotic = (p - 1.0) / psi.mu *
                   (psi.k * std::log(L) + std::log(psi.c0) - specfun::digamma(p) -
                    specfun::euler_gamma());
  out.residual = std::abs(out.value - out.asymptotic);
  return out;
}

BlowupReport rescale(const MaximizerResult& result, const Params& params, double s_max,
                     double r0) {
  params.validate();
  if (!result.converged) {
    throw std::invalid_argument("rescale: requires a converged maximizer");
  }
  const double q = params.conj();
  const double a = result.a_eps;
  const double aq = std::pow(a, q);

  BlowupReport rep;
  rep.eps = params.mu() - result.mu_eps;
  rep.a_eps = a;
  rep.ratio = result.lambda_eps / aq;
  rep.r_eps = std::pow(result.lambda_eps / (aq * std::exp(result.mu_eps * aq)),
                       1.0 / (params.theta + 1.0));
  rep.r0 = r0 > 0.0 ? r0 : 0.1 * params.R;
  rep.tail_energy = concentration_tail(result.u, rep.r0, params);

  rep.s_max = s_max;
  if (rep.r_eps * s_max > params.R) {
    rep.s_max = params.R / rep.r_eps;
    rep.s_max_truncated = true;
  }

  // Monotone interpolation of u_eps, with the peak value pinned at r = 0.
  std::vector<double> knots_x, knots_y;
  knots_x.reserve(result.u.values.size() + 1);
  knots_y.reserve(result.u.values.size() + 1);
  knots_x.push_back(0.0);
  knots_y.push_back(a);
  for (int i = 0; i < result.u.size(); ++i) {
    knots_x.push_back(result.u.grid->node(i));
    knots_y.push_back(result.u.values[static_cast<size_t>(i)]);
  }
  const MonotoneCubic interp(std::move(knots_x), std::move(knots_y));

  const PsiProfile psi = profile_psi(params);
  const int samples = 201;
  double dist_phi = 0.0, dist_psi = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double s = rep.s_max * j / (samples - 1);
    const double us = interp(rep.r_eps * s);
    const double phi = us / a;
    const double psie = std::pow(a, 1.0 / (params.p - 1.0)) * (us - a);
    dist_phi = std::max(dist_phi, std::abs(phi - 1.0));
    dist_psi = std::max(dist_psi, std::abs(psie - psi.value(s)));
  }
  rep.profile_distance_phi = dist_phi;
  rep.profile_distance_psi = dist_psi;
  return rep;
}

void write_csv(const std::vector<BlowupReport>& rows, std::ostream& os) {
  os << "eps,a_eps,r_eps,ratio,profile_distance_phi,profile_distance_psi,tail_energy,"
        "s_max,r0,s_max_truncated\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.eps,
                  r.a_eps, r.r_eps, r.ratio, r.profile_distance_phi, r.profile_distance_psi,
                  r.tail_energy, r.s_max, r.r0, r.s_max_truncated ? 1 : 0);
    os << buf;
  }
}

std::pair<double, double> truncation_energies(const MaximizerResult& result, double c,
                                              const Params& params) {
  params.validate();
  if (!(c > 1.0)) {
    throw std::domain_error("truncation_energies: need c > 1");
  }
  const RadialFunction& u = result.u;
  const auto& r = u.grid->nodes();
  const double cut = result.a_eps / c;
  const double w_a = omega(params.alpha());
  double low = 0.0, high = 0.0;
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    const double x0 = r[i], x1 = r[i + 1];
    const double u0 = u.values[i], u1 = u.values[i + 1];
    const double slope = (u1 - u0) / (x1 - x0);
    const double e = std::pow(std::abs(slope), params.p) * w_a;
    // Below the cut the truncation follows u (energy in `low`); above it the
    // truncation is flat and the excess carries the slope (energy in `high`).
    auto add = [&](double y0, double y1, bool above) {
      if (y1 <= y0) {
        return;
      }
      (above ? high : low) += e * cell_moment(y0, y1, params.alpha());
    };
    if (u0 <= cut && u1 <= cut) {
      add(x0, x1, false);
    } else if (u0 >= cut && u1 >= cut) {
      add(x0, x1, true);
    } else {
      const double xc = x0 + (cut - u0) / slope;
      const bool first_above = u0 > cut;
      add(x0, xc, first_above);
      add(xc, x1, !first_above);
    }
  }
  return {low, high};
}

double concentration_tail(const RadialFunction& u, double r0, const Params& params) {
  params.validate();
  if (!(r0 > 0.0 && r0 < u.grid->radius())) {
    throw std::domain_error("concentration_tail: r0 must lie in (0, R)");
  }
  return pl_gradient_energy(u, r0, u.grid->radius(), params);
}

AnnulusCapacity annulus_capacity(double a, double b, double va, double vb,
                                 const Params& params) {
  params.validate();
  if (!(a > 0.0 && a < b && b <= params.R)) {
    throw std::domain_error("annulus_capacity: need 0 < a < b <= R");
  }
  if (va < vb) {
    throw std::domain_error("annulus_capacity: need va >= vb");
  }
  const double log_ratio = std::log(b / a);
  AnnulusCapacity out;
  out.value = omega(params.alpha()) * std::pow(va - vb, params.p) /
              std::pow(log_ratio, params.p - 1.0);
  out.minimizer = [=](double r) {
    return (vb * (std::log(r) - std::log(a)) + va * (std::log(b) - std::log(r))) / log_ratio;
  };
  return out;
}

double dirac_pairing(const MaximizerResult& result, const Params& params,
                     const std::function<double(double)>& v) {
  params.validate();
  const double q = params.conj();
  const RadialFunction& u = result.u;
  std::vector<double> f(u.values.size());
  for (int i = 0; i < u.size(); ++i) {
    const double uv = std::max(u.values[static_cast<size_t>(i)], 0.0);
    f[static_cast<size_t>(i)] = result.a_eps / result.lambda_eps *
                                std::pow(uv, 1.0 / (params.p - 1.0)) *
                                std::exp(result.mu_eps * std::pow(uv, q)) *
                                v(u.grid->node(i));
  }
  return integrate_samples(*u.grid, f, params.theta);
}

}  // namespace tmfrac
