#pragma once

#include <optional>
#include <vector>

#include "eigenpool/hiermodel.hpp"

namespace eigenpool {

using ScalarTrace = std::vector<double>;

struct LogAbTraces {
  ScalarTrace mean;
  ScalarTrace sd;
};

/// Per saved sample: mean and (population) SD of log(a_i b_j) over the
/// (p-1)^2 entries with i, j < p, i.e. the non-zero block of the outer
/// product of diag(A) and diag(B).
LogAbTraces trace_log_ab(const std::vector<PosteriorSample>& samples);

/// t = (1/K) sum_k diag(V^T U_k)∘diag(V^T U_k).
Vector similarity_stat(const OrthonormalMatrix& v, const std::vector<OrthonormalMatrix>& u_list);

// The data statistic t(S_1, ..., S_K): similarity_stat of the eigenvectors
// of sum_k S_k / (n_k - 1) against the eigenvectors of each S_k.
Vector data_similarity(const std::vector<GroupData>& data);

struct Interval {
  double lower;
  double upper;
  bool contains(double x) const { return x >= lower && x <= upper; }
};

struct PredictiveSummary {
  ScalarTrace min_draws;
  ScalarTrace max_draws;
  Interval min_interval;
  Interval max_interval;
  // Present when an observed statistic was supplied.
  std::optional<double> observed_min;
  std::optional<double> observed_max;
  bool covers_min = false;
  bool covers_max = false;
  bool covers() const { return covers_min && covers_max; }
};

/// Per-draw min and max of the predictive similarity statistics and their
/// central `level` empirical intervals.
PredictiveSummary predictive_minmax(const std::vector<Vector>& stats,
                                    const std::optional<Vector>& observed = std::nullopt,
                                    double level = 0.95);

// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double prob);

/// n / (1 + 2 sum rho_t) with the sum truncated by Geyer's initial monotone
/// positive sequence rule, clamped to (0, n]. Requires n >= 10 and a
/// non-constant trace.
double effective_sample_size(const ScalarTrace& trace);

/// Average of diag(U_check^T U_hat)^2; 1 iff equal up to column signs.
double estimator_similarity(const OrthonormalMatrix& u_hat, const OrthonormalMatrix& u_check);

// Display transform for statistics in (0, 1).
double logit(double x);

}  // namespace eigenpool
