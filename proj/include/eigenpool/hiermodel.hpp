#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eigenpool/bingham.hpp"
#include "eigenpool/hypergeo.hpp"
#include "eigenpool/matcore.hpp"

namespace eigenpool {

/// Per-group sufficient statistics: sample size and the centered
/// sum-of-squares matrix S_k = Y_k^T (I - 11^T / n_k) Y_k.
struct GroupData {
  int n = 0;
  SymMatrix s;
};

// Throws InvalidInput on empty input, inconsistent dimensions, n < min_n or
// an S that is not positive semidefinite.
void validate_groups(const std::vector<GroupData>& data, int min_n = 2);

/// Prior hyperparameters:
///   w ~ gamma(eta0/2, rate eta0*tau0_sq/2)             (mean 1/tau0_sq)
///   1/lambda_jk ~ gamma(nu0/2, rate nu0*sigma0_sq/2), ordered.
struct PriorConfig {
  double eta0 = 2.0;
  double tau0_sq = 0.001;
  double nu0 = 2.0;
  double sigma0_sq = 1.0;

  void validate() const;
  double w_shape() const { return 0.5 * eta0; }
  double w_rate() const { return 0.5 * eta0 * tau0_sq; }
};

enum class ModelVariant { hierarchical, no_pooling, one_shared_eigenvector, common_covariance };

// Short names used on the command line: hier, nopool, shared1, common.
std::string variant_name(ModelVariant variant);
ModelVariant parse_variant(const std::string& name);

enum class PairSchedule { single_pair, full_sweep };

struct SamplerSettings {
  // U_k update per iteration: one random column pair (the listed algorithm)
  // or a sweep over a random perfect matching.
  PairSchedule group_pairs = PairSchedule::single_pair;
  int phi_grid = PhiSampler::kDefaultGridPoints;
  int shape_grid = 200;
  bool mh_correction = true;
  CorrectionSettings correction;
  int predictive_sweeps = 20;

  void validate() const;
};

/// One master stream for the across-group block and a dedicated stream per
/// group. Group k's within-group updates only ever touch groups[k], so the
/// K updates of step 1 could run concurrently without changing any draw.
struct ChainRng {
  Rng master;
  std::vector<Rng> groups;

  static ChainRng seeded(std::uint64_t seed, int group_count);
};

struct ChainState {
  ModelVariant variant = ModelVariant::hierarchical;
  std::vector<OrthonormalMatrix> u;
  std::vector<SpectrumDiag> lambda;
  OrthonormalMatrix v;
  ConcentrationParams conc;
  ChainRng rng;

  int groups() const { return static_cast<int>(u.size()); }
  int dim() const { return v.rows(); }
  // diag(A), diag(B) as seen by the within-group update; zero when the
  // variant shares nothing across groups.
  Vector coupling_a() const;
  Vector coupling_b() const;
};

/// A ChainState with the empirical warm start: U_k, Lambda_k from
/// sym_eig(S_k / (n_k - 1)), V from the pooled covariance, alpha and beta
/// equally spaced, w at its prior mean. Degenerate empirical spectra (n_k <= p,
/// ties) are floored and separated so every Lambda_k is strictly ordered.
ChainState initialize_state(const std::vector<GroupData>& data, const PriorConfig& priors,
                            ModelVariant variant, std::uint64_t seed);

// Everything an update needs besides state and data.
struct SamplerContext {
  PriorConfig priors;
  SamplerSettings settings;
  PhiSampler phi;

  SamplerContext(PriorConfig priors, SamplerSettings settings);
};

void update_group_eigenvectors(ChainState& state, const std::vector<GroupData>& data,
                               const SamplerContext& ctx);
void update_group_eigenvalues(ChainState& state, const std::vector<GroupData>& data,
                              const SamplerContext& ctx);
void update_v(ChainState& state, const SamplerContext& ctx);

/// M = sum_k (V^T U_k)∘(V^T U_k); rows and columns sum to K.
Matrix compute_m(const ChainState& state);

void update_w(ChainState& state, const Matrix& m, const SamplerContext& ctx);
void update_shape_vectors(ChainState& state, const Matrix& m, const SamplerContext& ctx);

// Log of the unnormalized full conditional of interior alpha_i (and of
// beta_j) at `x`: -w x [(K I - M) beta]_i + (K/2) sum_{j != i} log|x - alpha_j|.
double alpha_log_conditional(const ChainState& state, const Matrix& m, int i, double x);
double beta_log_conditional(const ChainState& state, const Matrix& m, int j, double x);

/// One full scan: U_k, Lambda_k, V, then (M, w, alpha, beta), skipping the
/// steps the variant fixes.
void gibbs_iteration(ChainState& state, const std::vector<GroupData>& data,
                     const SamplerContext& ctx);

/// Bartlett construction; throws InvalidInput when df < p or scale is not
/// positive definite.
SymMatrix sample_wishart(const SymMatrix& scale, int df, Rng& rng);

// Sum of df outer products of N(0, scale) vectors; valid for any df >= 0 and
// positive semidefinite scale (singular Wishart when df < p).
SymMatrix sample_scatter(const SymMatrix& scale, int df, Rng& rng);

/// The saved state of one iteration.
struct PosteriorSample {
  long iteration = 0;
  ModelVariant variant = ModelVariant::hierarchical;
  std::vector<OrthonormalMatrix> u;
  std::vector<SpectrumDiag> lambda;
  OrthonormalMatrix v;
  double w = 0.0;
  Vector alpha;
  Vector beta;
  // Copula mode only: per-group correlation matrices.
  std::vector<Matrix> correlation;

  int groups() const { return static_cast<int>(u.size()); }
  int dim() const { return v.rows(); }
  Matrix sigma(int k) const;
  Vector a() const;
  Vector b() const;
};

PosteriorSample snapshot(const ChainState& state, long iteration);

struct ChainControls {
  long iterations = 0;
  long burn_in = 0;
  long thin = 1;
  std::uint64_t seed = 1;
  SamplerSettings settings;

  void validate() const;
  bool saves(long iteration) const {
    return iteration > burn_in && (iteration - burn_in) % thin == 0;
  }
};

using SampleSink = std::function<void(const PosteriorSample&)>;
// Called after every iteration (1-based) with the full state.
using IterationObserver = std::function<void(long iteration, const ChainState&)>;

/// Runs the Gibbs sampler and emits a PosteriorSample every `thin`
/// iterations after burn-in. Deterministic given the seed.
///
/// Variants: no_pooling skips the across-group block and uses A = B = 0;
/// one_shared_eigenvector pins w = 1000, alpha = beta = e_1 and still
/// updates V; common_covariance fits one (U, Lambda) to sum_k S_k with
/// sum_k (n_k - 1) degrees of freedom and reports it for every group.
void run_chain(const std::vector<GroupData>& data, const PriorConfig& priors, ModelVariant variant,
               const ChainControls& controls, const SampleSink& sink,
               const IterationObserver& observer = {});

std::vector<PosteriorSample> run_chain_collect(const std::vector<GroupData>& data,
                                               const PriorConfig& priors, ModelVariant variant,
                                               const ChainControls& controls);

/// Simulated data sets for a predictive check: U~_k from the sample's
/// Bingham (Haar for no pooling, the shared U for common covariance), then
/// S~_k ~ Wishart(U~_k Lambda_k U~_k^T, n_k - 1) with the sample's Lambda_k.
std::vector<GroupData> posterior_predictive_groups(const PosteriorSample& sample,
                                                   const std::vector<GroupData>& data, Rng& rng,
                                                   const SamplerSettings& settings = {});

// V point estimate: eigenvectors of the posterior mean of V A V^T.
OrthonormalMatrix point_estimate_v(const std::vector<PosteriorSample>& samples);
// Posterior mean of U_k Lambda_k U_k^T.
Matrix posterior_mean_sigma(const std::vector<PosteriorSample>& samples, int k);

struct SyntheticSpec {
  int groups = 1;
  int dim = 2;
  std::vector<int> n;  // one entry, or one per group
  double w = 0.0;      // 0 draws every U_k from the Haar measure
  Vector alpha;
  Vector beta;
  std::optional<OrthonormalMatrix> v;  // Haar draw when absent
  std::vector<SpectrumDiag> eigenvalues;  // one entry, or one per group
  std::uint64_t seed = 1;
  bool raw_observations = false;  // draw Y_k rows instead of S_k directly
  int bingham_sweeps = 200;
};

struct SyntheticTruth {
  std::vector<OrthonormalMatrix> u;
  std::vector<SpectrumDiag> lambda;
  OrthonormalMatrix v;
  double w = 0.0;
  Vector alpha;
  Vector beta;
};

struct SyntheticData {
  std::vector<GroupData> groups;
  SyntheticTruth truth;
  std::vector<Matrix> observations;  // filled when raw_observations
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Centered sum of squares of the rows of y.
SymMatrix centered_scatter(const Matrix& y);

}  // namespace eigenpool
