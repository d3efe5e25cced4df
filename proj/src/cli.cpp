#include "tmfrac/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmfrac/blowup.hpp"
#include "tmfrac/eigen.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/extremal.hpp"
#include "tmfrac/fracspace.hpp"
#include "tmfrac/green.hpp"
#include "tmfrac/specfun.hpp"
#include "tmfrac/testfn.hpp"

namespace tmfrac {

namespace {

using nlohmann::json;

struct GridConfig {
  int n = 1024;
  std::string kind = "power";
  double grading = 2.0;
  double decades = 8.0;
};

struct RunConfig {
  std::string command;
  Params params;
  GridConfig grid;
  SolverOptions solver;
  double eps = -1.0;  // used by maximize and nu sweeps
  std::vector<double> eps_list;
  std::vector<double> nu_list;
  std::string out_dir = ".";
  std::string format = "csv";
};

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return item.key() == k;
        }) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream is(path);
  if (!is) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  json doc = json::parse(is);
  reject_unknown_keys(doc, {"command", "params", "grid", "solver", "eps", "sweep", "output"},
                      "top level");
  if (doc.contains("command")) {
    cfg.command = doc["command"].get<std::string>();
  }
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    reject_unknown_keys(p, {"p", "theta", "R", "nu"}, "params");
    if (p.contains("p")) cfg.params.p = p["p"].get<double>();
    if (p.contains("theta")) cfg.params.theta = p["theta"].get<double>();
    if (p.contains("R")) cfg.params.R = p["R"].get<double>();
    if (p.contains("nu")) cfg.params.nu = p["nu"].get<double>();
  }
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    reject_unknown_keys(g, {"n", "kind", "grading", "decades"}, "grid");
    if (g.contains("n")) cfg.grid.n = g["n"].get<int>();
    if (g.contains("kind")) cfg.grid.kind = g["kind"].get<std::string>();
    if (g.contains("grading")) cfg.grid.grading = g["grading"].get<double>();
    if (g.contains("decades")) cfg.grid.decades = g["decades"].get<double>();
  }
  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    reject_unknown_keys(s, {"tol", "max_iter", "damping", "n_starts"}, "solver");
    if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
    if (s.contains("max_iter")) cfg.solver.max_iter = s["max_iter"].get<int>();
    if (s.contains("damping")) cfg.solver.damping = s["damping"].get<double>();
    if (s.contains("n_starts")) cfg.solver.n_starts = s["n_starts"].get<int>();
  }
  if (doc.contains("eps")) {
    cfg.eps = doc["eps"].get<double>();
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    reject_unknown_keys(s, {"eps_list", "nu_list"}, "sweep");
    if (s.contains("eps_list")) cfg.eps_list = s["eps_list"].get<std::vector<double>>();
    if (s.contains("nu_list")) cfg.nu_list = s["nu_list"].get<std::vector<double>>();
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    reject_unknown_keys(o, {"dir", "format"}, "output");
    if (o.contains("dir")) cfg.out_dir = o["dir"].get<std::string>();
    if (o.contains("format")) cfg.format = o["format"].get<std::string>();
  }
}

GridPtr build_grid(const RunConfig& cfg) {
  if (cfg.grid.kind == "power") {
    return RadialGrid::power(cfg.grid.n, cfg.params.R, cfg.grid.grading);
  }
  if (cfg.grid.kind == "log") {
    return RadialGrid::logarithmic(cfg.grid.n, cfg.params.R, cfg.grid.decades);
  }
  throw std::invalid_argument("config: grid.kind must be 'power' or 'log'");
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("cannot open " + path.string());
  }
  os << doc.dump(2) << "\n";
}

int thread_budget(size_t items) {
  unsigned cap = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("TMFRAC_THREADS")) {
    const long parsed = std::strtol(env, nullptr, 10);
    if (parsed > 0) {
      cap = static_cast<unsigned>(parsed);
    }
  }
  cap = std::max(1u, cap);
  return static_cast<int>(std::min<size_t>(cap, items));
}

// Runs fn(i) for i in [0, items) on a small worker pool, results in order.
template <typename T, typename Fn>
std::vector<T> ordered_parallel(size_t items, Fn fn) {
  std::vector<T> out(items);
  const int workers = thread_budget(items);
  if (workers <= 1) {
    for (size_t i = 0; i < items; ++i) {
      out[i] = fn(i);
    }
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::future<void>> pool;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (int w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&] {
      for (size_t i = next.fetch_add(1); i < items; i = next.fetch_add(1)) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      }
    }));
  }
  for (auto& f : pool) {
    f.get();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return out;
}

double require_eps(const RunConfig& cfg) {
  if (cfg.eps > 0.0) {
    return cfg.eps;
  }
  return 0.5 * cfg.params.mu();
}

int cmd_constants(const RunConfig& cfg) {
  const auto grid = build_grid(cfg);
  const auto eig = principal_eigenvalue(cfg.params, grid);
  json doc;
  doc["p"] = cfg.params.p;
  doc["theta"] = cfg.params.theta;
  doc["R"] = cfg.params.R;
  doc["nu"] = cfg.params.nu;
  doc["alpha"] = cfg.params.alpha();
  doc["omega_theta"] = omega(cfg.params.theta);
  doc["omega_alpha"] = omega(cfg.params.alpha());
  doc["mu"] = cfg.params.mu();
  doc["ball_volume"] = ball_volume(cfg.params.theta, cfg.params.R);
  doc["lambda"] = eig.lambda;
  write_json(doc, std::filesystem::path(cfg.out_dir) / "result.json");
  return 0;
}

int cmd_eigen(const RunConfig& cfg) {
  const auto grid = build_grid(cfg);
  EigenOptions opts;
  opts.tol = std::min(cfg.solver.tol, 1e-10);
  opts.max_iter = cfg.solver.max_iter;
  opts.n_starts = cfg.solver.n_starts;
  const auto eig = principal_eigenvalue(cfg.params, grid, opts);
  json doc;
  doc["lambda"] = eig.lambda;
  doc["iterations"] = eig.iterations;
  doc["residual"] = eig.residual;
  write_json(doc, std::filesystem::path(cfg.out_dir) / "result.json");
  write_csv(eig.eigenfunction, (std::filesystem::path(cfg.out_dir) / "profile.csv").string());
  return 0;
}

int cmd_maximize(const RunConfig& cfg) {
  const auto grid = build_grid(cfg);
  const double eps = require_eps(cfg);
  const auto res = solve_subcritical(cfg.params, eps, grid, cfg.solver);
  json doc;
  doc["eps"] = eps;
  doc["mu_eps"] = res.mu_eps;
  doc["S_eps"] = res.S_eps;
  doc["lambda_eps"] = res.lambda_eps;
  doc["a_eps"] = res.a_eps;
  doc["fixed_point_residual"] = res.fixed_point_residual;
  doc["iterations"] = res.iterations;
  write_json(doc, std::filesystem::path(cfg.out_dir) / "result.json");
  write_csv(res.u, (std::filesystem::path(cfg.out_dir) / "profile.csv").string());
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto grid = build_grid(cfg);
  const std::filesystem::path dir(cfg.out_dir);
  if (!cfg.eps_list.empty()) {
    SolverOptions opts = cfg.solver;
    if (cfg.params.nu > 0.0 && opts.lambda_theta <= 0.0) {
      opts.lambda_theta = principal_eigenvalue(cfg.params, grid).lambda;
    }
    const auto rows = ordered_parallel<BlowupReport>(cfg.eps_list.size(), [&](size_t i) {
      const auto res = solve_subcritical(cfg.params, cfg.eps_list[i], grid, opts);
      return rescale(res, cfg.params);
    });
    std::ofstream os(dir / "table.csv");
    write_csv(rows, os);
    json doc;
    doc["rows"] = rows.size();
    doc["eps_list"] = cfg.eps_list;
    write_json(doc, dir / "result.json");
    return 0;
  }
  if (!cfg.nu_list.empty()) {
    const double eps = require_eps(cfg);
    struct NuRow {
      double nu, S_eps, lambda_eps, a_eps;
    };
    // One shared admissibility threshold for the whole list.
    Params probe = cfg.params;
    probe.nu = 0.0;
    const double lambda = principal_eigenvalue(probe, grid).lambda;
    const auto rows = ordered_parallel<NuRow>(cfg.nu_list.size(), [&](size_t i) {
      Params p = cfg.params;
      p.nu = cfg.nu_list[i];
      SolverOptions opts = cfg.solver;
      opts.lambda_theta = lambda;
      const auto res = solve_subcritical(p, eps, grid, opts);
      return NuRow{p.nu, res.S_eps, res.lambda_eps, res.a_eps};
    });
    std::ofstream os(dir / "table.csv");
    os << "nu,S_eps,lambda_eps,a_eps\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.nu, r.S_eps,
                    r.lambda_eps, r.a_eps);
      os << buf;
    }
    json doc;
    doc["rows"] = rows.size();
    doc["eps"] = eps;
    doc["nu_list"] = cfg.nu_list;
    write_json(doc, dir / "result.json");
    return 0;
  }
  throw std::invalid_argument("sweep: need sweep.eps_list or sweep.nu_list");
}

int cmd_profile(const RunConfig& cfg) {
  const auto grid = build_grid(cfg);
  const PsiProfile psi = profile_psi(cfg.params);
  const auto prof = sample(
      grid, [&](double r) { return psi.value(r); }, [&](double r) { return psi.slope(r); });
  write_csv(prof, (std::filesystem::path(cfg.out_dir) / "profile.csv").string());
  json doc;
  doc["c0"] = psi.c0;
  doc["mu"] = psi.mu;
  doc["normalization"] = psi_normalization(cfg.params);
  json energies = json::array();
  for (double L : {1.0, 10.0, 100.0}) {
    const auto e = psi_truncated_energy(L, cfg.params);
    energies.push_back({{"L", L},
                        {"value", e.value},
                        {"asymptotic", e.asymptotic},
                        {"residual", e.residual}});
  }
  doc["truncated_energies"] = energies;
  write_json(doc, std::filesystem::path(cfg.out_dir) / "result.json");
  return 0;
}

int cmd_green(const RunConfig& cfg) {
  const auto grid = build_grid(cfg);
  GreenOptions opts;
  const auto res = solve_green(cfg.params, grid, opts);
  json doc;
  doc["A0_fit"] = res.A0_fit;
  doc["A0_formula"] = res.A0_formula;
  doc["upper_bound"] = res.upper_bound;
  doc["residual"] = res.residual;
  write_json(doc, std::filesystem::path(cfg.out_dir) / "result.json");
  write_csv(res.g, (std::filesystem::path(cfg.out_dir) / "profile.csv").string());
  return 0;
}

int cmd_testfn(const RunConfig& cfg) {
  if (cfg.eps_list.empty()) {
    throw std::invalid_argument("testfn: need sweep.eps_list");
  }
  const auto grid = build_grid(cfg);
  const auto green = solve_green(cfg.params, grid);
  const auto rows = lower_bound_check(cfg.params, cfg.eps_list, green);
  const std::filesystem::path dir(cfg.out_dir);
  std::ofstream os(dir / "table.csv");
  write_csv(rows, os);
  json doc;
  doc["upper_bound"] = green.upper_bound;
  double best_eps = 0.0, best_margin = 0.0;
  bool found = false;
  for (const auto& r : rows) {
    if (!r.rejected && r.margin > 0.0) {
      best_eps = r.eps;
      best_margin = r.margin;
      found = true;
    }
  }
  doc["smallest_eps_with_positive_margin"] = found ? json(best_eps) : json(nullptr);
  doc["margin_at_that_eps"] = found ? json(best_margin) : json(nullptr);
  write_json(doc, dir / "result.json");
  return 0;
}

struct VerifyLine {
  std::string name;
  bool pass;
  std::string detail;
  bool informational = false;
};

int cmd_verify(const RunConfig& cfg) {
  std::vector<VerifyLine> lines;
  char buf[256];
  auto check = [&](const std::string& name, double residual, double tol) {
    std::snprintf(buf, sizeof(buf), "residual %.3e, tol %.1e", residual, tol);
    lines.push_back({name, residual <= tol, buf, false});
  };
  auto info = [&](const std::string& name, double value) {
    std::snprintf(buf, sizeof(buf), "%.9f", value);
    lines.push_back({name, true, buf, true});
  };

  const Params& P = cfg.params;
  {
    double worst = 0.0;
    for (double x : {0.5, 1.7, 3.2, 7.9, 15.0}) {
      worst = std::max(worst, std::abs(specfun::gamma(x + 1.0) - x * specfun::gamma(x)) /
                                  specfun::gamma(x + 1.0));
    }
    check("gamma_recursion", worst, 1e-11);
  }
  check("digamma_at_1", std::abs(specfun::digamma(1.0) + specfun::euler_gamma()), 1e-12);
  check("beta_identity", std::abs((P.p - 1.0) * specfun::beta(P.p - 1.0, 1.0) - 1.0), 1e-12);
  {
    const auto tb = specfun::truncated_beta_integral(100.0, 2.0);
    const double exact = std::log(101.0) + 1.0 / 101.0 - 1.0;
    check("truncated_beta_closed_form", std::abs(tb.value - exact), 1e-10);
  }
  check("psi_normalization", std::abs(psi_normalization(P) - 1.0), 1e-8);
  {
    const auto e = psi_truncated_energy(10.0, P);
    const PsiProfile psi = profile_psi(P);
    const double direct = integrate(
        [&](double r) { return std::pow(std::abs(psi.slope(r)), P.p); }, P.alpha(), 0.0,
        10.0, 1e-12);
    check("psi_truncated_energy_identity", std::abs(direct - e.value) / e.value, 1e-6);
  }

  const auto grid = build_grid(cfg);
  {
    const auto eig = principal_eigenvalue(P, grid);
    info("lambda", eig.lambda);
    check("eigen_rayleigh_consistency",
          std::abs(rayleigh_quotient(eig.eigenfunction, P) - eig.lambda) /
              eig.lambda,
          1e-8);
  }
  {
    // nu = 0 closed form on a log grid, then the configured nu.
    Params p0 = P;
    p0.nu = 0.0;
    const auto lg = RadialGrid::logarithmic(std::max(cfg.grid.n, 512), P.R, 8.0);
    const auto g0 = solve_green(p0, lg);
    double worst = 0.0;
    const double scale = (P.theta + 1.0) / P.mu();
    for (int i = 0; i < lg->size(); ++i) {
      worst = std::max(worst, std::abs(g0.g.values[static_cast<size_t>(i)] -
                                       scale * std::log(P.R / lg->node(i))));
    }
    check("green_nu0_closed_form", worst, 1e-8);
    const auto gr = solve_green(P, lg);
    check("green_A0_cross_validation", std::abs(gr.A0_fit - gr.A0_formula), 1e-4);
    info("upper_bound", gr.upper_bound);
  }
  {
    const double eps = require_eps(cfg);
    const auto fixed = solve_subcritical(P, eps, grid, cfg.solver);
    const auto ascent = solve_subcritical_oracle(P, eps, grid, cfg.solver);
    check("subcritical_cross_validation",
          std::abs(fixed.S_eps - ascent.S_eps) / fixed.S_eps, 5e-3);
    check("subcritical_constraint_active",
          std::abs(norms(fixed.u, P).h_nu - 1.0), 1e-8);
    info("S_eps", fixed.S_eps);
  }

  const std::filesystem::path dir(cfg.out_dir);
  std::ofstream os(dir / "report.txt");
  bool all_pass = true;
  for (const auto& l : lines) {
    if (l.informational) {
      os << l.name << ": " << l.detail << "\n";
      std::cout << l.name << ": " << l.detail << "\n";
    } else {
      os << l.name << ": " << (l.pass ? "PASS" : "FAIL") << " (" << l.detail << ")\n";
      std::cout << l.name << ": " << (l.pass ? "PASS" : "FAIL") << " (" << l.detail << ")\n";
      all_pass = all_pass && l.pass;
    }
  }
  json doc;
  doc["all_pass"] = all_pass;
  write_json(doc, dir / "result.json");
  return all_pass ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"tmfrac: extremals and identity checks for a fractional-dimensional "
               "Trudinger-Moser functional under the H_nu constraint"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::optional<double> opt_p, opt_theta, opt_R, opt_nu, opt_eps, opt_tol, opt_damping,
      opt_grading, opt_decades;
  std::optional<int> opt_n, opt_max_iter, opt_n_starts;
  std::optional<std::string> opt_out, opt_kind;

  const std::vector<std::string> commands = {"constants", "eigen",  "maximize", "sweep",
                                             "profile",   "green",  "testfn",   "verify"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--p", opt_p, "exponent p >= 2");
    sub->add_option("--theta", opt_theta, "weight exponent theta >= p-1");
    sub->add_option("--R", opt_R, "domain radius");
    sub->add_option("--nu", opt_nu, "constraint parameter nu");
    sub->add_option("--eps", opt_eps, "subcriticality parameter");
    sub->add_option("--out", opt_out, "output directory");
    sub->add_option("--grid-n", opt_n, "grid size");
    sub->add_option("--grid-kind", opt_kind, "power or log");
    sub->add_option("--grid-grading", opt_grading, "power grid grading");
    sub->add_option("--grid-decades", opt_decades, "log grid decades");
    sub->add_option("--tol", opt_tol, "solver tolerance");
    sub->add_option("--max-iter", opt_max_iter, "solver iteration cap");
    sub->add_option("--damping", opt_damping, "fixed point damping");
    sub->add_option("--n-starts", opt_n_starts, "oracle start count");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) {
      load_config_file(config_path, cfg);
    }
    for (const auto& name : commands) {
      if (app.get_subcommand(name)->parsed()) {
        cfg.command = name;
      }
    }
    if (opt_p) cfg.params.p = *opt_p;
    if (opt_theta) cfg.params.theta = *opt_theta;
    if (opt_R) cfg.params.R = *opt_R;
    if (opt_nu) cfg.params.nu = *opt_nu;
    if (opt_eps) cfg.eps = *opt_eps;
    if (opt_out) cfg.out_dir = *opt_out;
    if (opt_n) cfg.grid.n = *opt_n;
    if (opt_kind) cfg.grid.kind = *opt_kind;
    if (opt_grading) cfg.grid.grading = *opt_grading;
    if (opt_decades) cfg.grid.decades = *opt_decades;
    if (opt_tol) cfg.solver.tol = *opt_tol;
    if (opt_max_iter) cfg.solver.max_iter = *opt_max_iter;
    if (opt_damping) cfg.solver.damping = *opt_damping;
    if (opt_n_starts) cfg.solver.n_starts = *opt_n_starts;

    cfg.params.validate();
    std::filesystem::create_directories(cfg.out_dir);

    if (cfg.command == "constants") return cmd_constants(cfg);
    if (cfg.command == "eigen") return cmd_eigen(cfg);
    if (cfg.command == "maximize") return cmd_maximize(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "profile") return cmd_profile(cfg);
    if (cfg.command == "green") return cmd_green(cfg);
    if (cfg.command == "testfn") return cmd_testfn(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    throw std::invalid_argument("unknown command '" + cfg.command + "'");
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FunctionalOverflow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tmfrac
