#include "tmfrac/fracspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tmfrac/quadrature.hpp"
#include "tmfrac/specfun.hpp"

namespace tmfrac {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kHNuUnityBand = 1e-9;

// int_{x0}^{x1} r^{w+k} dr
double power_moment(double x0, double x1, double w, int k) {
  const double e = w + k + 1.0;
  return (std::pow(x1, e) - std::pow(x0, e)) / e;
}

// Adds to (w0, w1) the weights of the exact moment of r^w against the line
// through (x0, f0), (x1, f1) restricted to [y0, y1] (a sub-segment of the
// cell, used both for regular cells and the (0, r_1] extension).
void accumulate_segment(double x0, double x1, double y0, double y1, double w, double& w0,
                        double& w1) {
  const double m0 = power_moment(y0, y1, w, 0);
  const double m1 = power_moment(y0, y1, w, 1);
  const double inv_h = 1.0 / (x1 - x0);
  // f(r) = f0 (x1 - r)/(x1 - x0) + f1 (r - x0)/(x1 - x0)
  w0 += (x1 * m0 - m1) * inv_h;
  w1 += (m1 - x0 * m0) * inv_h;
}

void check_finite(std::span<const double> f, const char* who) {
  for (double v : f) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(who) + ": non-finite sample");
    }
  }
}

}  // namespace

double omega(double theta) {
  if (!(theta > 0.0)) {
    throw std::domain_error("omega: theta must be positive");
  }
  return 2.0 * std::pow(kPi, 0.5 * theta) / specfun::gamma(0.5 * theta);
}

double ball_volume(double theta, double R) {
  if (!(R > 0.0)) {
    throw std::domain_error("ball_volume: R must be positive");
  }
  return omega(theta) * std::pow(R, theta + 1.0) / (theta + 1.0);
}

double Params::mu() const {
  const double a = alpha();
  return (theta + 1.0) * std::pow(omega(a), 1.0 / a);
}

void Params::validate() const {
  if (!(p >= 2.0)) {
    throw std::invalid_argument("Params: p must satisfy p >= 2");
  }
  if (!(theta >= alpha())) {
    throw std::invalid_argument("Params: theta must satisfy theta >= alpha = p - 1");
  }
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw std::invalid_argument("Params: R must be positive and finite");
  }
  if (!(nu >= 0.0)) {
    throw std::invalid_argument("Params: nu must be nonnegative");
  }
}

RadialGrid::RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {}

GridPtr RadialGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) {
    throw std::invalid_argument("RadialGrid: need at least two nodes");
  }
  if (!(nodes.front() > 0.0)) {
    throw std::invalid_argument("RadialGrid: nodes must lie in (0, R]");
  }
  for (size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw std::invalid_argument("RadialGrid: nodes must be strictly increasing");
    }
  }
  return std::shared_ptr<const RadialGrid>(new RadialGrid(std::move(nodes)));
}

GridPtr RadialGrid::power(int n, double R, double grading) {
  if (n < 64) {
    throw std::invalid_argument("RadialGrid::power: need n >= 64");
  }
  if (!(R > 0.0) || !(grading >= 1.0)) {
    throw std::invalid_argument("RadialGrid::power: need R > 0 and grading >= 1");
  }
  std::vector<double> nodes(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) {
    nodes[static_cast<size_t>(i - 1)] =
        R * std::pow(static_cast<double>(i) / n, grading);
  }
  nodes.back() = R;
  return from_nodes(std::move(nodes));
}

GridPtr RadialGrid::logarithmic(int n, double R, double decades) {
  if (n < 64) {
    throw std::invalid_argument("RadialGrid::logarithmic: need n >= 64");
  }
  if (!(R > 0.0) || !(decades > 0.0)) {
    throw std::invalid_argument("RadialGrid::logarithmic: need R > 0 and decades > 0");
  }
  std::vector<double> nodes(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(n - 1 - i) / (n - 1);
    nodes[static_cast<size_t>(i)] = R * std::pow(10.0, -decades * t);
  }
  nodes.back() = R;
  return from_nodes(std::move(nodes));
}

GridPtr make_grid(int n, double R, double grading, GridKind kind, double decades) {
  switch (kind) {
    case GridKind::power:
      return RadialGrid::power(n, R, grading);
    case GridKind::log:
      return RadialGrid::logarithmic(n, R, decades);
  }
  throw std::invalid_argument("make_grid: unknown grid kind");
}

RadialFunction sample(const GridPtr& grid, const std::function<double(double)>& f) {
  RadialFunction u;
  u.grid = grid;
  u.values.reserve(static_cast<size_t>(grid->size()));
  for (double r : grid->nodes()) {
    u.values.push_back(f(r));
  }
  fill_derivative(u);
  return u;
}

RadialFunction sample(const GridPtr& grid, const std::function<double(double)>& f,
                      const std::function<double(double)>& df) {
  RadialFunction u;
  u.grid = grid;
  u.values.reserve(static_cast<size_t>(grid->size()));
  u.derivative.reserve(static_cast<size_t>(grid->size()));
  for (double r : grid->nodes()) {
    u.values.push_back(f(r));
    u.derivative.push_back(df(r));
  }
  return u;
}

std::vector<double> differentiate(const RadialGrid& grid, std::span<const double> values) {
  const auto& r = grid.nodes();
  const int n = grid.size();
  if (static_cast<int>(values.size()) != n) {
    throw std::invalid_argument("differentiate: sample count does not match grid");
  }
  std::vector<double> d(static_cast<size_t>(n));
  auto stencil = [&](int ia, int ib, int ic, int eval) {
    const double a = r[static_cast<size_t>(ia)], b = r[static_cast<size_t>(ib)],
                 c = r[static_cast<size_t>(ic)];
    const double fa = values[static_cast<size_t>(ia)], fb = values[static_cast<size_t>(ib)],
                 fc = values[static_cast<size_t>(ic)];
    const double x = r[static_cast<size_t>(eval)];
    return fa * (2.0 * x - b - c) / ((a - b) * (a - c)) +
           fb * (2.0 * x - a - c) / ((b - a) * (b - c)) +
           fc * (2.0 * x - a - b) / ((c - a) * (c - b));
  };
  d[0] = stencil(0, 1, 2, 0);
  for (int i = 1; i + 1 < n; ++i) {
    d[static_cast<size_t>(i)] = stencil(i - 1, i, i + 1, i);
  }
  d[static_cast<size_t>(n - 1)] = stencil(n - 3, n - 2, n - 1, n - 1);
  return d;
}

void fill_derivative(RadialFunction& u) {
  u.derivative = differentiate(*u.grid, u.values);
}

std::vector<double> differentiate_transpose(const RadialGrid& grid,
                                            std::span<const double> y) {
  const auto& r = grid.nodes();
  const int n = grid.size();
  if (static_cast<int>(y.size()) != n) {
    throw std::invalid_argument("differentiate_transpose: sample count does not match grid");
  }
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  auto scatter = [&](int row, int ia, int ib, int ic) {
    const double a = r[static_cast<size_t>(ia)], b = r[static_cast<size_t>(ib)],
                 c = r[static_cast<size_t>(ic)];
    const double x = r[static_cast<size_t>(row)];
    const double yr = y[static_cast<size_t>(row)];
    out[static_cast<size_t>(ia)] += yr * (2.0 * x - b - c) / ((a - b) * (a - c));
    out[static_cast<size_t>(ib)] += yr * (2.0 * x - a - c) / ((b - a) * (b - c));
    out[static_cast<size_t>(ic)] += yr * (2.0 * x - a - b) / ((c - a) * (c - b));
  };
  scatter(0, 0, 1, 2);
  for (int i = 1; i + 1 < n; ++i) {
    scatter(i, i - 1, i, i + 1);
  }
  scatter(n - 1, n - 3, n - 2, n - 1);
  return out;
}

std::vector<double> moment_weights(const RadialGrid& grid, double weight_exponent) {
  const auto& r = grid.nodes();
  const int n = grid.size();
  std::vector<double> w(static_cast<size_t>(n), 0.0);
  // First cell (0, r_1]: exact moment against the linear extension through
  // the first two nodes.
  accumulate_segment(r[0], r[1], 0.0, r[0], weight_exponent, w[0], w[1]);
  for (int i = 0; i + 1 < n; ++i) {
    accumulate_segment(r[static_cast<size_t>(i)], r[static_cast<size_t>(i + 1)],
                       r[static_cast<size_t>(i)], r[static_cast<size_t>(i + 1)],
                       weight_exponent, w[static_cast<size_t>(i)],
                       w[static_cast<size_t>(i + 1)]);
  }
  const double factor = weight_exponent == 0.0 ? 1.0 : omega(weight_exponent);
  for (double& x : w) {
    x *= factor;
  }
  return w;
}

double integrate_samples(const RadialGrid& grid, std::span<const double> f,
                         double weight_exponent) {
  check_finite(f, "integrate_samples");
  const auto w = moment_weights(grid, weight_exponent);
  if (f.size() != w.size()) {
    throw std::invalid_argument("integrate_samples: sample count does not match grid");
  }
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    sum += w[i] * f[i];
  }
  return sum;
}

double integrate_samples(const RadialGrid& grid, std::span<const double> f,
                         double weight_exponent, double a, double b) {
  check_finite(f, "integrate_samples");
  const auto& r = grid.nodes();
  const int n = grid.size();
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("integrate_samples: sample count does not match grid");
  }
  if (b <= a) {
    return 0.0;
  }
  a = std::max(a, 0.0);
  b = std::min(b, r.back());
  if (b <= a) {
    return 0.0;
  }
  double w0, w1;
  double sum = 0.0;
  // Extension segment below the first node.
  if (a < r[0]) {
    w0 = w1 = 0.0;
    accumulate_segment(r[0], r[1], a, std::min(b, r[0]), weight_exponent, w0, w1);
    sum += w0 * f[0] + w1 * f[1];
  }
  for (int i = 0; i + 1 < n; ++i) {
    const double x0 = r[static_cast<size_t>(i)], x1 = r[static_cast<size_t>(i + 1)];
    const double y0 = std::max(a, x0), y1 = std::min(b, x1);
    if (y1 <= y0) {
      continue;
    }
    w0 = w1 = 0.0;
    accumulate_segment(x0, x1, y0, y1, weight_exponent, w0, w1);
    sum += w0 * f[static_cast<size_t>(i)] + w1 * f[static_cast<size_t>(i + 1)];
  }
  const double factor = weight_exponent == 0.0 ? 1.0 : omega(weight_exponent);
  return sum * factor;
}

std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f,
                                        double weight_exponent) {
  check_finite(f, "cumulative_integral");
  const auto& r = grid.nodes();
  const int n = grid.size();
  if (static_cast<int>(f.size()) != n) {
    throw std::invalid_argument("cumulative_integral: sample count does not match grid");
  }
  const double factor = weight_exponent == 0.0 ? 1.0 : omega(weight_exponent);
  std::vector<double> cum(static_cast<size_t>(n));
  double w0 = 0.0, w1 = 0.0;
  accumulate_segment(r[0], r[1], 0.0, r[0], weight_exponent, w0, w1);
  cum[0] = factor * (w0 * f[0] + w1 * f[1]);
  for (int i = 0; i + 1 < n; ++i) {
    w0 = w1 = 0.0;
    accumulate_segment(r[static_cast<size_t>(i)], r[static_cast<size_t>(i + 1)],
                       r[static_cast<size_t>(i)], r[static_cast<size_t>(i + 1)],
                       weight_exponent, w0, w1);
    cum[static_cast<size_t>(i + 1)] =
        cum[static_cast<size_t>(i)] +
        factor * (w0 * f[static_cast<size_t>(i)] + w1 * f[static_cast<size_t>(i + 1)]);
  }
  return cum;
}

double integrate(const std::function<double(double)>& f, double weight_exponent, double a,
                 double b, double rel_tol) {
  if (b <= a) {
    return 0.0;
  }
  const double factor = weight_exponent == 0.0 ? 1.0 : omega(weight_exponent);
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  const auto integrand = [&](double r) { return f(r) * std::pow(r, weight_exponent); };
  return factor * integrate_adaptive(integrand, a, b, opts);
}

double integrate(const RadialFunction& f, double weight_exponent) {
  return integrate_samples(*f.grid, f.values, weight_exponent);
}

double integrate(const RadialFunction& f, double weight_exponent, double a, double b) {
  return integrate_samples(*f.grid, f.values, weight_exponent, a, b);
}

NormReport norms(const RadialFunction& u, const Params& params) {
  params.validate();
  if (!u.grid || u.size() != u.grid->size() ||
      u.derivative.size() != u.values.size()) {
    throw std::invalid_argument("norms: malformed radial function");
  }
  const double p = params.p;
  std::vector<double> up(u.values.size()), dp(u.values.size());
  for (size_t i = 0; i < u.values.size(); ++i) {
    up[i] = std::pow(std::abs(u.values[i]), p);
    dp[i] = std::pow(std::abs(u.derivative[i]), p);
  }
  const double lp_p = integrate_samples(*u.grid, up, params.theta);
  const double grad_p = integrate_samples(*u.grid, dp, params.alpha());

  NormReport out;
  out.lp_theta = std::pow(lp_p, 1.0 / p);
  out.grad_lp_alpha = std::pow(grad_p, 1.0 / p);
  double radicand = grad_p - params.nu * lp_p;
  if (radicand < -1e-12 * std::max(1.0, grad_p)) {
    throw std::domain_error(
        "norms: constraint radicand negative (nu too large for this profile)");
  }
  radicand = std::max(radicand, 0.0);
  out.h_nu = std::pow(radicand, 1.0 / p);
  if (out.h_nu >= 1.0 - kHNuUnityBand) {
    out.p_h = std::numeric_limits<double>::infinity();
  } else {
    out.p_h = std::pow(1.0 - radicand, -1.0 / (p - 1.0));
  }
  return out;
}

RadialFunction tintarev_lift(const RadialFunction& u, const Params& params) {
  const NormReport n = norms(u, params);
  if (n.grad_lp_alpha > 1.0 + 1e-9) {
    throw std::invalid_argument("tintarev_lift: requires ||u'||_{L^p_alpha} <= 1");
  }
  const double factor =
      std::pow(1.0 + params.nu * std::pow(n.lp_theta, params.p), 1.0 / params.p);
  RadialFunction v = u;
  for (auto& x : v.values) {
    x *= factor;
  }
  for (auto& x : v.derivative) {
    x *= factor;
  }
  return v;
}

void write_csv(const RadialFunction& u, std::ostream& os) {
  os << "r,u,du\n";
  char buf[96];
  for (int i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17e,%.17e,%.17e\n", u.grid->node(i),
                  u.values[static_cast<size_t>(i)], u.derivative[static_cast<size_t>(i)]);
    os << buf;
  }
}

void write_csv(const RadialFunction& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("write_csv: cannot open " + path);
  }
  write_csv(u, os);
}

RadialFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,u,du", 0) != 0) {
    throw std::runtime_error("read_csv: missing r,u,du header");
  }
  std::vector<double> r, v, d;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    double x[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(row, cell, ',')) {
        throw std::runtime_error("read_csv: short row");
      }
      x[k] = std::stod(cell);
    }
    r.push_back(x[0]);
    v.push_back(x[1]);
    d.push_back(x[2]);
  }
  RadialFunction u;
  u.grid = RadialGrid::from_nodes(std::move(r));
  u.values = std::move(v);
  u.derivative = std::move(d);
  return u;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("MonotoneCubic: need matching knots, at least two");
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    if (!(h[i] > 0.0)) {
      throw std::invalid_argument("MonotoneCubic: knots must be strictly increasing");
    }
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      slope_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) {
      m = 0.0;
    } else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) {
      m = 3.0 * d0;
    }
    return m;
  };
  if (n == 2) {
    slope_[0] = slope_[1] = delta[0];
  } else {
    slope_[0] = endpoint(h[0], h[1], delta[0], delta[1]);
    slope_[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
}

double MonotoneCubic::operator()(double x) const {
  const size_t n = x_.size();
  if (x <= x_.front()) {
    return y_.front() + slope_.front() * (x - x_.front());
  }
  if (x >= x_.back()) {
    return y_.back() + slope_.back() * (x - x_.back());
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  (void)n;
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

}  // namespace tmfrac
