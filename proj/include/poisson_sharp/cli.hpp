#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "poisson_sharp/io.hpp"
#include "poisson_sharp/random_fields.hpp"
#include "poisson_sharp/shape_metrics.hpp"

namespace poisson_sharp {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum ExitCode : int { exit_ok = 0, exit_io = 1, exit_config = 2, exit_solver = 3, exit_check = 4 };

inline const std::vector<std::string>& all_suites() {
  static const std::vector<std::string> s{"sigma", "ball", "talenti", "green", "sign", "eigen"};
  return s;
}

struct RunConfig {
  std::string domain = "square:1";
  double h = 1.0 / 64;
  double rtol = 1e-10;
  std::vector<double> betas;           // absolute values in [0, |D|]
  std::vector<double> beta_fractions;  // fractions of |D|
  int beta_count = 8;                  // k/count |D| for k = 0..count
  std::vector<std::string> suites = all_suites();
  int samples = 10;
  int kmax = 6;
  double eps = 1e-8;
  std::uint64_t seed = 20170001;
  std::string sigma_mode = "ball";     // σ evaluator of the sign suite: ball | computed
  int source = -1;                     // green: interior cell, -1 for the centermost
  std::filesystem::path output_dir = "out";
};

inline DomainPtr config_domain(const RunConfig& c) {
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw ConfigError("h must be positive");
  if (!(c.rtol > 0.0 && c.rtol < 1.0)) throw ConfigError("rtol must lie in (0, 1)");
  try {
    return make_domain(c.domain, 1.0 / c.h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

inline std::vector<double> resolve_betas(const RunConfig& c, double measure) {
  std::vector<double> out;
  if (!c.betas.empty()) {
    for (double b : c.betas) {
      if (!(b >= -1e-12 * measure && b <= measure * (1.0 + 1e-12)))
        throw ConfigError("beta " + format_double(b) + " outside [0, |D|] = [0, " + format_double(measure) + "]");
      out.push_back(std::clamp(b, 0.0, measure));
    }
  } else if (!c.beta_fractions.empty()) {
    for (double t : c.beta_fractions) {
      if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("beta fraction outside [0, 1]");
      out.push_back(t * measure);
    }
  } else {
    if (c.beta_count < 1) throw ConfigError("beta count must be positive");
    for (int k = 0; k <= c.beta_count; ++k) out.push_back(measure * k / c.beta_count);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::string> resolve_suites(const RunConfig& c) {
  std::vector<std::string> out;
  for (const auto& s : c.suites) {
    if (s.empty() || s == "none") continue;
    if (std::find(all_suites().begin(), all_suites().end(), s) == all_suites().end())
      throw ConfigError("unknown suite: " + s);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

inline nlohmann::json config_json(const RunConfig& c) {
  return {{"domain", c.domain}, {"h", c.h},       {"rtol", c.rtol}, {"seed", c.seed},
          {"samples", c.samples}, {"kmax", c.kmax}, {"sigma_mode", c.sigma_mode}};
}

/// Independent stream per suite so selecting suites does not shift the others.
inline Lcg64 suite_rng(std::uint64_t seed, std::string_view suite) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char ch : suite) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
  return Lcg64(seed ^ h);
}

inline void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body,
                       bool binary = false) {
  auto out = open_output(p, binary);
  body(out);
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

inline bool any_failed(const std::vector<BoundReport>& reports) {
  return std::any_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.failed(); });
}

inline void write_reports(const RunConfig& c, const std::string& command, const std::vector<BoundReport>& reports) {
  nlohmann::json header = config_json(c);
  header["command"] = command;
  write_file(c.output_dir / "reports.jsonl", [&](std::ostream& o) { write_reports_jsonl(o, reports, header); });
  write_file(c.output_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, reports); });
}

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code and throws on config or solver errors;
// run_command() maps exceptions to codes.

inline int run_sigma(const RunConfig& c, std::ostream& log) {
  const auto d = config_domain(c);
  const auto betas = resolve_betas(c, d->measure());
  OptimizerOptions opt;
  opt.rtol = c.rtol;
  opt.seed = c.seed;
  ExtremalOptimizer optimizer(d, opt);
  const auto curve = optimizer.curve(betas);
  write_file(c.output_dir / "sigma_curve.csv", [&](std::ostream& o) { write_sigma_csv(o, curve, *d); });
  write_file(c.output_dir / "sigma_curve.json", [&](std::ostream& o) { o << sigma_json(curve, *d).dump(2) << '\n'; });
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    const std::string stem = "sigma_" + std::to_string(i);
    write_file(c.output_dir / (stem + "_u.pgm"), [&](std::ostream& o) { write_pgm(o, p.solution); }, true);
    write_file(c.output_dir / (stem + "_f.pgm"), [&](std::ostream& o) { write_pgm(o, p.source); }, true);
    log << "beta " << format_double(p.beta) << "  sigma " << format_double(p.sigma) << '\n';
  }
  if (!curve.monotone) {
    log << "sigma curve is not monotone\n";
    return exit_check;
  }
  return exit_ok;
}

namespace detail {

inline void suite_sigma(const RunConfig& c, const DomainPtr& d, ExtremalOptimizer& opt, std::vector<BoundReport>& out) {
  auto rng = suite_rng(c.seed, "sigma");
  for (int s = 0; s < c.samples; ++s) {
    const auto f = random_nonnegative(d, rng);
    const auto point = opt.optimize(f.norm_l1() / f.norm_linf());
    auto r = verify_modulus(f, point, opt.solver(), c.rtol);
    r.context["sample"] = s;
    out.push_back(std::move(r));
  }
  // Equality witness: the extremal source attains the bound.
  for (double beta : resolve_betas(c, d->measure())) {
    if (beta == 0.0) continue;
    const auto point = opt.optimize(beta);
    auto r = verify_modulus(point.source, point, opt.solver(), c.rtol);
    r.id = "modulus_equality";
    r.context["gap"] = std::abs(r.rhs - r.lhs);
    out.push_back(std::move(r));
  }
}

inline void suite_ball(const RunConfig& c, const DomainPtr& d, ExtremalOptimizer& opt, std::vector<BoundReport>& out) {
  const auto ball = BallModulusParams::for_domain(*d);
  for (double beta : resolve_betas(c, d->measure())) {
    if (beta == 0.0) continue;
    out.push_back(compare_with_ball(opt.optimize(beta), ball));
  }
  for (const auto& row : constants_table(ball, 50))
    out.push_back(make_report("printed_vs_radial", row.radial, row.printed, 0.0,
                              {{"n", ball.dim}, {"t", row.t}, {"R", ball.radius}}));
  write_file(c.output_dir / "constants.csv",
             [&](std::ostream& o) { write_constants_csv(o, ball.dim, constants_table(ball, 50)); });
}

inline void suite_talenti(const RunConfig& c, const DomainPtr& d, const PoissonSolver& solver,
                          std::vector<BoundReport>& out) {
  auto rng = suite_rng(c.seed, "talenti");
  std::vector<ScalarField> fs;
  for (int s = 0; s < c.samples; ++s) fs.push_back(random_nonnegative(d, rng));
  const RearrangementChecker rc(d, solver);
  std::vector<BoundReport> rs(fs.size());
  parallel_for(fs.size(), [&](std::size_t i) {
    rs[i] = rc.talenti(fs[i], 0.03, c.rtol);
    rs[i].context["sample"] = i;
  });
  out.insert(out.end(), rs.begin(), rs.end());
}

inline void suite_green(const RunConfig& c, const DomainPtr& d, const PoissonSolver& solver,
                        std::vector<BoundReport>& out) {
  auto rng = suite_rng(c.seed, "green");
  std::vector<int> sources;
  for (int s = 0; s < c.samples; ++s) sources.push_back(static_cast<int>(rng.index(d->size())));
  const RearrangementChecker rc(d, solver);
  std::vector<BoundReport> rs(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) { rs[i] = rc.green(sources[i], 8, 0.05, c.rtol); });
  out.insert(out.end(), rs.begin(), rs.end());
}

inline void suite_sign(const RunConfig& c, const DomainPtr& d, ExtremalOptimizer& opt, std::vector<BoundReport>& out) {
  if (c.sigma_mode != "ball" && c.sigma_mode != "computed") throw ConfigError("sigma_mode must be ball or computed");
  const auto sigma = c.sigma_mode == "ball" ? ball_sigma_evaluator(*d) : computed_sigma_evaluator(opt);
  auto rng = suite_rng(c.seed, "sign");
  for (int s = 0; s < c.samples; ++s) {
    const auto f = random_signed_blobs(d, rng);
    auto split = bound_sign_split(sigma, f, opt.solver(), c.rtol);
    split.context["sample"] = s;
    out.push_back(std::move(split));
    auto shifted = bound_shifted(*d, f, sigma, opt.torsion(), opt.solver(), c.rtol);
    for (BoundReport* r : {&shifted.upper, &shifted.lower, &shifted.two_sided, &shifted.rederived}) {
      r->context["sample"] = s;
      out.push_back(std::move(*r));
    }
  }
}

inline std::vector<BoundReport> eigen_reports(const DomainPtr& d, const std::vector<EigenPair>& pairs) {
  const auto ball = BallModulusParams::for_domain(*d);
  std::vector<BoundReport> out;
  for (const auto& ep : pairs) out.push_back(eigen_bound_check(ball, ep));
  for (const auto& ep : pairs) out.push_back(eigen_raw_bound_check(ball, ep));
  return out;
}

inline void check_kmax(int kmax) {
  if (kmax < 1 || kmax > 20) throw ConfigError("kmax must lie in [1, 20]");
}

}  // namespace detail

/// Runs the selected suites and writes reports.jsonl and summary.csv.
inline int run_verify(const RunConfig& c, std::ostream& log) {
  const auto suites = resolve_suites(c);
  if (c.samples < 0) throw ConfigError("samples must be nonnegative");
  if (suites.empty()) {
    write_reports(c, "verify", {});
    return exit_ok;
  }
  const auto d = config_domain(c);
  resolve_betas(c, d->measure());
  if (std::find(suites.begin(), suites.end(), "eigen") != suites.end()) detail::check_kmax(c.kmax);
  OptimizerOptions opt_options;
  opt_options.rtol = c.rtol;
  opt_options.seed = c.seed;
  ExtremalOptimizer opt(d, opt_options);
  std::vector<BoundReport> reports;
  for (const auto& s : suites) {
    const std::size_t before = reports.size();
    if (s == "sigma") detail::suite_sigma(c, d, opt, reports);
    else if (s == "ball") detail::suite_ball(c, d, opt, reports);
    else if (s == "talenti") detail::suite_talenti(c, d, opt.solver(), reports);
    else if (s == "green") detail::suite_green(c, d, opt.solver(), reports);
    else if (s == "sign") detail::suite_sign(c, d, opt, reports);
    else if (s == "eigen") {
      auto more = detail::eigen_reports(d, eigenpairs(opt.solver(), c.kmax, c.eps));
      reports.insert(reports.end(), more.begin(), more.end());
    }
    const auto failed = std::count_if(reports.begin() + static_cast<std::ptrdiff_t>(before), reports.end(),
                                      [](const BoundReport& r) { return r.failed(); });
    log << s << ": " << reports.size() - before << " checks, " << failed << " failed\n";
  }
  write_reports(c, "verify", reports);
  return any_failed(reports) ? exit_check : exit_ok;
}

inline int run_eigen(const RunConfig& c, std::ostream& log) {
  detail::check_kmax(c.kmax);
  if (!(c.eps > 0.0 && c.eps < 1e-4)) throw ConfigError("eps must lie in (0, 1e-4)");
  const auto d = config_domain(c);
  const auto pairs = eigenpairs(PoissonSolver(d), c.kmax, c.eps);
  const auto reports = detail::eigen_reports(d, pairs);
  const std::vector<BoundReport> main(reports.begin(), reports.begin() + static_cast<std::ptrdiff_t>(pairs.size()));
  write_file(c.output_dir / "eigen.csv", [&](std::ostream& o) { write_eigen_csv(o, pairs, main); });
  for (const auto& ep : pairs) {
    write_file(c.output_dir / ("eigen_" + std::to_string(ep.k) + ".pgm"), [&](std::ostream& o) { write_pgm(o, ep.u); },
               true);
    log << "k " << ep.k << "  lambda " << format_double(ep.lambda) << '\n';
  }
  write_reports(c, "eigen", reports);
  return any_failed(reports) ? exit_check : exit_ok;
}

inline int run_green(const RunConfig& c, std::ostream& log) {
  const auto d = config_domain(c);
  const int source = c.source < 0 ? centermost_cell(*d) : c.source;
  if (static_cast<std::size_t>(source) >= d->size()) throw ConfigError("source is not an interior cell");
  const RearrangementChecker rc(d);
  const PoissonSolver solver(d);
  const auto column = solver.green_column(source, c.rtol);
  write_file(c.output_dir / "green.csv", [&](std::ostream& o) { write_field_csv(o, column.g); });
  write_file(c.output_dir / "green.pgm", [&](std::ostream& o) { write_pgm(o, column.g); }, true);
  write_file(c.output_dir / "green_profile.csv",
             [&](std::ostream& o) { write_radial_profile_csv(o, radial_profile(rearrange(column.g, rc.ball()), d)); });
  const auto report = rc.green(source, 8, 0.05, c.rtol);
  log << "green source " << source << "  margin " << format_double(report.margin) << '\n';
  write_reports(c, "green", {report});
  return report.failed() ? exit_check : exit_ok;
}

inline int run_talenti(const RunConfig& c, std::ostream& log) {
  if (c.samples < 1) throw ConfigError("samples must be positive");
  const auto d = config_domain(c);
  const RearrangementChecker rc(d);
  const PoissonSolver ball_solver(rc.ball());
  auto rng = suite_rng(c.seed, "talenti");
  std::vector<BoundReport> reports;
  for (int s = 0; s < c.samples; ++s) {
    const auto f = random_nonnegative(d, rng);
    reports.push_back(rc.talenti(f, 0.03, c.rtol));
    reports.back().context["sample"] = s;
    if (s == 0) {
      const auto fstar = rearrange(f, rc.ball());
      const auto ustar = rearrange(solve_poisson(d, f, c.rtol).u, rc.ball());
      const auto v = ball_solver.solve(fstar, c.rtol).u;
      write_file(c.output_dir / "talenti_f_star.csv", [&](std::ostream& o) { write_radial_profile_csv(o, radial_profile(fstar, d)); });
      write_file(c.output_dir / "talenti_u_star.csv", [&](std::ostream& o) { write_radial_profile_csv(o, radial_profile(ustar, d)); });
      write_file(c.output_dir / "talenti_v.csv", [&](std::ostream& o) { write_radial_profile_csv(o, radial_profile(v, d)); });
    }
  }
  log << "talenti: " << reports.size() << " checks\n";
  write_reports(c, "talenti", reports);
  return any_failed(reports) ? exit_check : exit_ok;
}

/// Dispatches a subcommand and maps exceptions to exit codes.
inline int run_command(const std::string& command, const RunConfig& c, std::ostream& log = std::cerr) {
  try {
    if (command == "sigma") return run_sigma(c, log);
    if (command == "verify") return run_verify(c, log);
    if (command == "eigen") return run_eigen(c, log);
    if (command == "green") return run_green(c, log);
    if (command == "talenti") return run_talenti(c, log);
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const DomainError& e) {
    log << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_io;
  }
}

}  // namespace poisson_sharp
