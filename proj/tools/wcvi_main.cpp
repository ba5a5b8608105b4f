#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "wcvi/experiment.hpp"

// Exit codes: 0 success, 1 bad input (flags, config, model names), 2 numerical
// failure during a run.  Failures print one machine-readable line on stderr.

namespace {

std::string one_line(const char* what) {
  std::string s(what);
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ';';
    if (c == '"') c = '\'';
  }
  return s;
}

int fail(const char* kind, const char* what, int code) {
  std::fprintf(stderr, "error kind=%s msg=\"%s\"\n", kind, one_line(what).c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavelet-copula variational inference experiment runner"};
  app.fallthrough();
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  CLI::Option* opt_config =
      app.add_option("--config", config_path, "experiment config (JSON); defaults apply without it");
  CLI::Option* opt_seed = app.add_option("--seed", seed, "master seed, overrides the config file");
  CLI::Option* opt_out = app.add_option("--out", out_dir, "output directory, overrides the config file");
  app.add_flag("--quiet", quiet, "suppress progress lines on stdout");

  CLI::App* cmd_simulate = app.add_subcommand("simulate", "draw a synthetic data set");
  CLI::App* cmd_fit = app.add_subcommand("fit", "run the variational fit");
  CLI::App* cmd_benchmark =
      app.add_subcommand("benchmark", "variational fit against the MCMC oracle over replications");
  CLI::App* cmd_gradcheck =
      app.add_subcommand("gradcheck", "tape gradients against central differences");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    return fail("user", e.what(), 1);
  }

  try {
    wcvi::ExperimentConfig cfg;
    if (opt_config->count()) cfg = wcvi::load_config_file(config_path);
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_out->count()) cfg.out_dir = out_dir;
    wcvi::validate_config(cfg);
    if (cmd_simulate->parsed())
      wcvi::run_simulate(cfg, quiet);
    else if (cmd_fit->parsed())
      wcvi::run_fit(cfg, quiet);
    else if (cmd_benchmark->parsed())
      wcvi::run_benchmark(cfg, quiet);
    else if (cmd_gradcheck->parsed())
      wcvi::run_gradcheck(cfg, quiet);
    return 0;
  } catch (const wcvi::InvalidInputError& e) {
    return fail("user", e.what(), 1);
  } catch (const wcvi::NotApplicableError& e) {
    return fail("user", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("numeric", e.what(), 2);
  }
}
