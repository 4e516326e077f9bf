#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eigenpool/io.hpp"

namespace eigenpool {

struct RunConfig {
  long iterations = 10000;
  long burn_in = 0;
  long thin = 10;
  std::optional<std::uint64_t> seed;
  PriorConfig priors;
  ModelVariant variant = ModelVariant::hierarchical;
  SamplerSettings settings;
  int chains = 1;
  // Run each chain on its own thread; output is identical either way.
  bool threaded = true;
  // One posterior-predictive data set per saved sample (Gaussian fits only).
  bool predictive = true;

  void validate() const;
};

/// Keys: iterations, burn_in, thin, seed, variant, eta0, tau0_sq, nu0,
/// sigma0_sq, phi_grid, shape_grid, mh_correction (off|1|2), group_pairs
/// (single|sweep), chains, threaded, predictive, predictive_sweeps.
/// Unknown keys are an error.
void apply_config(RunConfig& config, const std::map<std::string, std::string>& values);

// Parses the --mh-correction value.
void apply_mh_correction(RunConfig& config, const std::string& value);

std::uint64_t chain_seed(std::uint64_t seed, int chain);
std::uint64_t entropy_seed();

struct FitResult {
  std::vector<std::string> sample_files;
  std::vector<std::string> summary_files;
  std::uint64_t seed = 0;
};

/// Runs config.chains chains and writes samples.chain<i>.csv and
/// summary.chain<i>.txt into out_dir. copula selects the ordinal model on
/// raw data (missing values allowed).
FitResult fit_command(const RunConfig& config, const std::string& data_path, DataFormat format,
                      const std::string& out_dir, bool copula, std::ostream& log);

struct SimulateConfig {
  int groups = 4;
  int dim = 4;
  std::vector<int> n{50};
  double w = 500.0;
  std::vector<double> alpha;  // default equally spaced
  std::vector<double> beta;
  std::vector<double> eigenvalues;  // default p, p-1, ..., 1
  bool raw = false;

  SyntheticSpec to_spec(std::uint64_t seed) const;
};

/// Keys: groups, dim, n, w, alpha, beta, eigenvalues, raw (shared "seed"
/// is taken from RunConfig). Unknown keys are an error.
void apply_simulate_config(SimulateConfig& config, const std::map<std::string, std::string>& values);

/// Writes data.csv (raw or ssq format) and truth.txt into out_dir.
std::uint64_t simulate_command(const SimulateConfig& sim, std::optional<std::uint64_t> seed, DataFormat format,
                               const std::string& out_dir, std::ostream& log);

/// Report over a sample file: posterior-mean V (V A V^T rule), per-group
/// Lambda and U summaries, similarity table, ESS table, log A∘B traces and,
/// in copula mode, correlation spread with the sign-consistency count.
void write_report(std::ostream& out, const SampleFile& file, const std::vector<std::string>& group_names = {});

void summarize_command(const std::string& sample_path, std::ostream& out);

}  // namespace eigenpool
