#pragma once

#include <vector>

#include "eigenpool/matcore.hpp"

namespace eigenpool {

/// Parameters of the antipodally symmetric matrix Bingham density
/// p_B(U | A, B, V) ∝ etr(B U^T V A V^T U), with A = diag(a), B = diag(b).
struct BinghamParams {
  SpectrumDiag a;
  SpectrumDiag b;
  OrthonormalMatrix v;

  BinghamParams(SpectrumDiag a, SpectrumDiag b, OrthonormalMatrix v);
  int dim() const { return v.rows(); }
};

/// 2x2 matrices G, H of the pair conditional p(Z) ∝ exp(z1^T G z1 + z2^T H z2).
struct PairConditionalParams {
  SymMatrix g;
  SymMatrix h;
};

/// Exponent of the form sum_j u_j^T C_j u_j with
/// C_j = q_weight[j] * Q + s_weight[j] * S.
///
/// This covers every paired-column target in the sampler: the Bingham
/// density itself (Q = V A V^T, weights b), the within-group eigenvector
/// conditional (adds S_k with weights -1/(2 lambda_j)), and the V update
/// (Q = sum_k U_k B U_k^T, weights a).
struct ColumnQuadraticTarget {
  Matrix q;
  Vector q_weight;
  Matrix s;  // empty when unused
  Vector s_weight;

  int dim() const { return static_cast<int>(q.rows()); }
  Matrix column_matrix(int j) const;
  PairConditionalParams pair_conditional(const OrthonormalMatrix& n, int j1, int j2) const;
  double log_density(const OrthonormalMatrix& u) const;
};

ColumnQuadraticTarget bingham_target(const BinghamParams& params);

/// sum_ij a_i b_j (v_i^T u_j)^2 = a^T (X∘X) b with X = V^T U.
double log_density_unnorm(const OrthonormalMatrix& u, const BinghamParams& params);

struct PhiDraw {
  double phi;  // in [0, 2π)
  int s;       // ±1
};

/// Grid inverse-CDF sampler for the rotation angle of the pair conditional.
///
/// log p(φ) = c_cc cos²φ + c_ss sin²φ + c_cs cosφ sinφ is tabulated on a
/// uniform grid of `grid_points` cells over (0, 2π). The density has period
/// π, so only the cells in (0, π) are evaluated and the draw is shifted by π
/// with probability 1/2. Within a cell the log-density is linear, which makes
/// the cell an exponential segment that is inverted exactly.
class PhiSampler {
 public:
  static constexpr int kDefaultGridPoints = 4096;

  explicit PhiSampler(int grid_points = kDefaultGridPoints);

  PhiDraw sample(const PairConditionalParams& params, Rng& rng) const;
  int grid_points() const { return 2 * half_cells_; }

 private:
  int half_cells_;
  double width_;
  std::vector<double> cos2_;
  std::vector<double> sin2_;
  std::vector<double> cross_;
};

PhiDraw sample_phi(const PairConditionalParams& params, Rng& rng,
                   int grid_points = PhiSampler::kDefaultGridPoints);

// Z(φ, s) = [[cos φ, s sin φ], [sin φ, -s cos φ]].
Matrix rotation_z(const PhiDraw& draw);

/// Columns j1, j2 replaced by N Z with N = null_space(u, j1, j2) and Z drawn
/// from the pair conditional given by `params` (which must have been computed
/// with that same N).
OrthonormalMatrix update_column_pair(const OrthonormalMatrix& u, int j1, int j2,
                                     const PairConditionalParams& params, Rng& rng,
                                     const PhiSampler& sampler = PhiSampler());

// Builds N and the pair conditional from `target`, then updates the pair.
OrthonormalMatrix update_column_pair(const OrthonormalMatrix& u, int j1, int j2,
                                     const ColumnQuadraticTarget& target, Rng& rng,
                                     const PhiSampler& sampler = PhiSampler());

// Uniform random perfect matching of {0..p-1}; one index idle when p is odd.
std::vector<std::pair<int, int>> random_matching(int p, Rng& rng);

// Uniformly random unordered pair of distinct column indices.
std::pair<int, int> random_pair(int p, Rng& rng);

/// `sweeps` passes, each updating the pairs of a fresh random matching.
OrthonormalMatrix gibbs_sweep(const OrthonormalMatrix& u, const ColumnQuadraticTarget& target,
                              Rng& rng, int sweeps, const PhiSampler& sampler = PhiSampler());

OrthonormalMatrix gibbs_sweep_bingham(const OrthonormalMatrix& u, const BinghamParams& params,
                                      Rng& rng, int sweeps,
                                      const PhiSampler& sampler = PhiSampler());

/// Canonical mode representative: V with the matcore sign convention.
///
/// Every V S (S a diagonal sign matrix) is a mode. When the entries of a and
/// of b are distinct these 2^p matrices are the only modes; ties add
/// continua of modes (rotations within tied blocks).
OrthonormalMatrix mode_set(const BinghamParams& params);

}  // namespace eigenpool
