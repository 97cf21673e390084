// Command-line front end: sigma | verify | eigen | green | talenti.

#include <CLI11.hpp>

#include <iostream>

#include "poisson_sharp/cli.hpp"

int main(int argc, char** argv) {
  namespace ps = poisson_sharp;
  ps::RunConfig cfg;
  CLI::App app{"Sharp L-infinity modulus for the Dirichlet Poisson problem on grid domains"};
  app.set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  app.require_subcommand(1, 1);

  std::string seed_text = std::to_string(cfg.seed);
  std::string out_dir = cfg.output_dir.string();
  app.add_option("--domain", cfg.domain, "shape: disk:R ball:R square:L cube:L annulus:r,R l_shape:L mask:path")
      ->capture_default_str();
  app.add_option("--h", cfg.h, "grid spacing")->capture_default_str();
  app.add_option("--rtol", cfg.rtol, "relative residual tolerance of every solve")->capture_default_str();
  app.add_option("--betas,--beta", cfg.betas, "absolute beta values in [0, |D|]")->delimiter(',');
  app.add_option("--beta-fractions", cfg.beta_fractions, "beta values as fractions of |D|")->delimiter(',');
  app.add_option("--beta-count", cfg.beta_count, "beta = k/count |D| for k = 0..count")->capture_default_str();
  app.add_option("--suites", cfg.suites, "verify suites: sigma,ball,talenti,green,sign,eigen (or none)")
      ->delimiter(',');
  app.add_option("--samples", cfg.samples, "random fields (or sources) per suite")->capture_default_str();
  app.add_option("--kmax", cfg.kmax, "number of eigenpairs")->capture_default_str();
  app.add_option("--eps", cfg.eps, "eigenpair residual tolerance")->capture_default_str();
  app.add_option("--seed", seed_text, "seed of the random field families")->capture_default_str();
  app.add_option("--sigma-mode", cfg.sigma_mode, "sigma for the sign suite: ball or computed")->capture_default_str();
  app.add_option("--source", cfg.source, "green: interior cell index, -1 for the centermost cell");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  const char* commands[][2] = {{"sigma", "sigma curve with extremal sources and heatmaps"},
                               {"verify", "run bound suites, JSON-lines reports"},
                               {"eigen", "low Dirichlet eigenpairs and their bounds"},
                               {"green", "Green column and its rearrangement check"},
                               {"talenti", "rearrangement comparison on random sources"}};
  for (auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ps::exit_config;
  }
  try {
    std::size_t used = 0;
    cfg.seed = std::stoull(seed_text, &used, 0);
    if (used != seed_text.size()) throw std::invalid_argument(seed_text);
  } catch (const std::exception&) {
    std::cerr << "config error: seed must be an unsigned integer\n";
    return ps::exit_config;
  }
  cfg.output_dir = out_dir;
  return ps::run_command(app.get_subcommands().front()->get_name(), cfg, std::cerr);
}
