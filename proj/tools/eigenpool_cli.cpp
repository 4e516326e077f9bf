#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eigenpool/commands.hpp"
#include "eigenpool/errors.hpp"

namespace {

struct Options {
  std::string data;
  std::string format = "ssq";
  std::string config;
  std::optional<long> iterations;
  std::optional<long> burn_in;
  std::optional<long> thin;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::optional<int> chains;
  std::string out_dir = ".";
  std::string mh_correction;
};

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key=value configuration file");
  cmd->add_option("--iterations", o.iterations, "total Gibbs iterations");
  cmd->add_option("--burn-in", o.burn_in, "iterations discarded before saving");
  cmd->add_option("--thin", o.thin, "save every thin-th iteration after burn-in");
  cmd->add_option("--seed", o.seed, "64-bit seed (drawn from entropy and printed when absent)");
  cmd->add_option("--variant", o.variant, "hier, nopool, shared1 or common")
      ->check(CLI::IsMember({"hier", "nopool", "shared1", "common"}));
  cmd->add_option("--chains", o.chains, "number of chains");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--mh-correction", o.mh_correction, "off, 1 or 2")->check(CLI::IsMember({"off", "1", "2"}));
}

eigenpool::RunConfig build_config(const Options& o) {
  eigenpool::RunConfig c;
  if (!o.config.empty()) eigenpool::apply_config(c, eigenpool::read_config_file(o.config));
  if (o.iterations) c.iterations = *o.iterations;
  if (o.burn_in) c.burn_in = *o.burn_in;
  if (o.thin) c.thin = *o.thin;
  if (o.seed) c.seed = *o.seed;
  if (!o.variant.empty()) c.variant = eigenpool::parse_variant(o.variant);
  if (o.chains) c.chains = *o.chains;
  if (!o.mh_correction.empty()) eigenpool::apply_mh_correction(c, o.mh_correction);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian pooling of covariance eigenstructure across groups"};
  app.require_subcommand(1);
  Options o;

  CLI::App* fit = app.add_subcommand("fit", "fit the Gaussian model to grouped data");
  fit->add_option("--data", o.data, "input data file")->required();
  fit->add_option("--format", o.format, "raw or ssq")->check(CLI::IsMember({"raw", "ssq"}));
  add_run_flags(fit, o);

  CLI::App* fit_copula = app.add_subcommand("fit-copula", "fit the ordinal copula model to raw grouped data");
  fit_copula->add_option("--data", o.data, "input data file (raw format)")->required();
  fit_copula->add_option("--format", o.format, "raw")->check(CLI::IsMember({"raw"}));
  add_run_flags(fit_copula, o);

  CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic data with a known truth");
  simulate->add_option("--format", o.format, "raw or ssq")->check(CLI::IsMember({"raw", "ssq"}));
  simulate->add_option("--config", o.config, "key=value file (groups, dim, n, w, alpha, beta, eigenvalues, raw, seed)");
  simulate->add_option("--seed", o.seed, "64-bit seed");
  simulate->add_option("--out-dir", o.out_dir, "output directory");

  std::string samples;
  CLI::App* summarize = app.add_subcommand("summarize", "report on a sample file");
  summarize->add_option("samples", samples, "sample CSV written by fit")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed() || fit_copula->parsed()) {
      const bool copula = fit_copula->parsed();
      if (copula) o.format = "raw";
      eigenpool::fit_command(build_config(o), o.data, eigenpool::parse_format(o.format), o.out_dir, copula,
                             std::cout);
    } else if (simulate->parsed()) {
      eigenpool::SimulateConfig sim;
      std::optional<std::uint64_t> seed = o.seed;
      if (!o.config.empty()) {
        const auto values = eigenpool::read_config_file(o.config);
        eigenpool::apply_simulate_config(sim, values);
        if (!seed && values.count("seed")) seed = std::stoull(values.at("seed"));
      }
      eigenpool::simulate_command(sim, seed, eigenpool::parse_format(o.format), o.out_dir, std::cout);
    } else if (summarize->parsed()) {
      eigenpool::summarize_command(samples, std::cout);
    }
  } catch (const eigenpool::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
