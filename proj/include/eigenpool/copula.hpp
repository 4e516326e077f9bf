#pragma once

#include <vector>

#include "eigenpool/hiermodel.hpp"

namespace eigenpool {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-group n_k x p tables of ordered-categorical (or numeric) values with
/// an observed-entry mask. Only ranks within a group and column matter.
struct OrdinalTable {
  std::vector<Matrix> values;
  std::vector<Mask> observed;

  // All entries observed.
  static OrdinalTable complete(std::vector<Matrix> values);

  int groups() const { return static_cast<int>(values.size()); }
  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().cols()); }
  // Throws InvalidInput on ragged groups, empty groups, or non-finite
  // observed values.
  void validate() const;
};

/// Latent normal scores z_k (n_k x p), one matrix per group.
struct LatentState {
  std::vector<Matrix> z;
};

struct RankBounds {
  double lower;
  double upper;
};

/// lower = max{z_l : y_l < y_i}, upper = min{z_l : y_l > y_i} over observed l.
/// Tied values impose no constraint. Throws NumericalFailure when the latent
/// column is not rank-concordant at i (lower >= upper).
RankBounds rank_bounds(const Vector& y, const Vector& z, const Eigen::Array<bool, Eigen::Dynamic, 1>& observed,
                       int i);

// Throws NumericalFailure if y_l < y_m but z_l >= z_m for any observed pair
// in any group column.
void check_rank_concordance(const LatentState& state, const OrdinalTable& data);

/// Normal scores Φ^{-1}(r / (m + 1)) of the within-column average ranks;
/// missing entries start at 0.
LatentState initial_latent(const OrdinalTable& data);

/// One coordinate-wise Gibbs pass over every z_ij. Each coordinate is drawn
/// from N(-Σ_{l≠j} Ω_jl z_il / Ω_jj, 1/Ω_jj), Ω = Σ_k^{-1}, truncated to
/// rank_bounds (untruncated when missing). Group k draws from rngs[k].
void update_latent(LatentState& state, const std::vector<SymMatrix>& sigma, const OrdinalTable& data,
                   std::vector<Rng>& rngs);

/// C_ij = Σ_ij / sqrt(Σ_ii Σ_jj); throws InvalidInput on a non-positive
/// diagonal.
Matrix extract_correlation(const SymMatrix& sigma);

// Centered latent sums of squares with n_k taken as the group size.
std::vector<GroupData> latent_group_data(const LatentState& state);

/// Alternates update_latent with one hiermodel Gibbs iteration on the
/// current latent sums of squares. Saved samples carry per-group
/// correlation matrices. Groups of size 1 are allowed (S_k = 0).
void run_copula_chain(const OrdinalTable& data, const PriorConfig& priors, ModelVariant variant,
                      const ChainControls& controls, const SampleSink& sink,
                      const IterationObserver& observer = {});

std::vector<PosteriorSample> run_copula_chain_collect(const OrdinalTable& data, const PriorConfig& priors,
                                                      ModelVariant variant, const ChainControls& controls);

}  // namespace eigenpool
