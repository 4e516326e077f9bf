#pragma once

#include "eigenpool/matcore.hpp"

namespace eigenpool {

/// (w, α, β) parameterization: diag(A) = √w α, diag(B) = √w β with
/// α_1 = β_1 = 1 and α_p = β_p = 0.
///
/// The hierarchical model requires strictly decreasing α and β, but the
/// restricted "one shared eigenvector" variant pins α = β = (1, 0, ..., 0),
/// so construction only enforces the endpoints and monotonicity;
/// `strictly_ordered()` reports the stronger condition.
struct ConcentrationParams {
  double w = 1.0;
  Vector alpha;
  Vector beta;

  ConcentrationParams() = default;
  ConcentrationParams(double w, Vector alpha, Vector beta);

  int dim() const { return static_cast<int>(alpha.size()); }
  bool strictly_ordered() const;
  Vector a() const;
  Vector b() const;
};

// 2^-p π^-C(p,2) e^{-a^T b} Π_{i<j} (a_i - a_j)^{1/2} (b_i - b_j)^{1/2}, in
// log space. Requires strictly decreasing a and b.
double log_c_tilde(const Vector& a, const Vector& b);

// The same first-order term with the constant that makes it the leading
// asymptotic of 1 / 0F0 under the normalized Haar measure on O(p):
// π^{p(p+1)/4 - C(p,2)/2} / Π_{k=1}^p Γ(k/2) in place of 2^-p π^-C(p,2).
double log_c_leading(const Vector& a, const Vector& b);

struct CorrectionSettings {
  int order = 1;
  // Ceiling for the summed series term; keeps the MH ratio finite as
  // consecutive gaps collapse.
  double ceiling = 1e6;
};

/// h(α, β, w) = 1 + Σ_{i<j} [4w (α_i - α_j)(β_i - β_j)]^{-1}, the first
/// correction term of the large-w expansion. Only order 1 is available.
double correction_factor(const ConcentrationParams& params,
                         const CorrectionSettings& settings = {});

// Same series written in raw a, b: 1 + Σ_{i<j} [4 (a_i - a_j)(b_i - b_j)]^{-1}.
double correction_factor_raw(const Vector& a, const Vector& b,
                             const CorrectionSettings& settings = {});

/// log 0F0(A, B) = log ∫_{O(2)} etr(B X^T A X) [dX] for p = 2, by the
/// composite trapezoid rule over the rotation angle, doubled until successive
/// estimates agree to 1e-10.
double log_f00_quadrature_small_p(const Vector& a, const Vector& b);

/// MH correction of a w proposal drawn from the approximate full
/// conditional. Acceptance ratio r = [h(α,β,w_s) / h(α,β,w~)]^K; the
/// printed series approximates 0F0 / 0F0~, so this ratio is the one that
/// moves the target toward the exact normalizing constant.
double mh_correct_w(double w_current, double w_proposal, const ConcentrationParams& params,
                    int groups, Rng& rng, const CorrectionSettings& settings = {});

double mh_log_ratio_w(double w_current, double w_proposal, const ConcentrationParams& params,
                      int groups, const CorrectionSettings& settings = {});

}  // namespace eigenpool
