#include "eigenpool/hypergeo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigenpool/errors.hpp"

namespace eigenpool {

namespace {

void check_strict(const Vector& v, const char* what) {
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (!(v(i) < v(i - 1))) throw InvalidInput(std::string(what) + ": entries must be strictly decreasing");
  }
}

double log_gap_product(const Vector& a, const Vector& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = i + 1; j < a.size(); ++j) {
      total += 0.5 * (std::log(a(i) - a(j)) + std::log(b(i) - b(j)));
    }
  }
  return total;
}

double series_term(const Vector& a, const Vector& b, double scale, const CorrectionSettings& settings) {
  if (settings.order != 1) {
    throw InvalidInput("correction_factor: only the order-1 correction is available");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = i + 1; j < a.size(); ++j) {
      sum += 1.0 / (4.0 * scale * (a(i) - a(j)) * (b(i) - b(j)));
    }
  }
  return std::min(sum, settings.ceiling);
}

}  // namespace

ConcentrationParams::ConcentrationParams(double w_in, Vector alpha_in, Vector beta_in)
    : w(w_in), alpha(std::move(alpha_in)), beta(std::move(beta_in)) {
  if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("ConcentrationParams: w must be positive");
  const Eigen::Index p = alpha.size();
  if (p < 2 || beta.size() != p) throw InvalidInput("ConcentrationParams: alpha/beta must have equal length >= 2");
  for (const Vector* v : {&alpha, &beta}) {
    if ((*v)(0) != 1.0 || (*v)(p - 1) != 0.0) {
      throw InvalidInput("ConcentrationParams: shape vectors must start at 1 and end at 0");
    }
    for (Eigen::Index i = 1; i < p; ++i) {
      if ((*v)(i) > (*v)(i - 1)) throw InvalidInput("ConcentrationParams: shape vectors must be non-increasing");
    }
  }
}

bool ConcentrationParams::strictly_ordered() const {
  for (Eigen::Index i = 1; i < alpha.size(); ++i) {
    if (!(alpha(i) < alpha(i - 1)) || !(beta(i) < beta(i - 1))) return false;
  }
  return true;
}

Vector ConcentrationParams::a() const { return std::sqrt(w) * alpha; }
Vector ConcentrationParams::b() const { return std::sqrt(w) * beta; }

double log_c_tilde(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 1) throw InvalidInput("log_c_tilde: dimension mismatch");
  check_strict(a, "log_c_tilde");
  check_strict(b, "log_c_tilde");
  const double p = static_cast<double>(a.size());
  const double pairs = p * (p - 1.0) / 2.0;
  return -p * std::log(2.0) - pairs * std::log(std::numbers::pi) - a.dot(b) + log_gap_product(a, b);
}

double log_c_leading(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 1) throw InvalidInput("log_c_leading: dimension mismatch");
  check_strict(a, "log_c_leading");
  check_strict(b, "log_c_leading");
  const double p = static_cast<double>(a.size());
  const double pairs = p * (p - 1.0) / 2.0;
  double log_const = (p * (p + 1.0) / 4.0 - pairs / 2.0) * std::log(std::numbers::pi);
  for (int k = 1; k <= a.size(); ++k) log_const -= std::lgamma(0.5 * k);
  return log_const - a.dot(b) + log_gap_product(a, b);
}

double correction_factor(const ConcentrationParams& params, const CorrectionSettings& settings) {
  if (!params.strictly_ordered()) throw InvalidInput("correction_factor: tied alpha or beta entries");
  return 1.0 + series_term(params.alpha, params.beta, params.w, settings);
}

double correction_factor_raw(const Vector& a, const Vector& b, const CorrectionSettings& settings) {
  if (a.size() != b.size()) throw InvalidInput("correction_factor_raw: dimension mismatch");
  check_strict(a, "correction_factor_raw");
  check_strict(b, "correction_factor_raw");
  return 1.0 + series_term(a, b, 1.0, settings);
}

double log_f00_quadrature_small_p(const Vector& a, const Vector& b) {
  if (a.size() != 2 || b.size() != 2) {
    throw InvalidInput("log_f00_quadrature_small_p: only p = 2 is supported");
  }
  // x_11^2 = x_22^2 = cos^2, x_12^2 = x_21^2 = sin^2 for rotations and
  // reflections alike, so the O(2) average reduces to one angle.
  const double k_cc = a(0) * b(0) + a(1) * b(1);
  const double k_ss = a(0) * b(1) + a(1) * b(0);
  auto estimate = [&](int n) {
    const double top = std::max(k_cc, k_ss);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / n;
      const double c = std::cos(phi);
      const double s = std::sin(phi);
      sum += std::exp(k_cc * c * c + k_ss * s * s - top);
    }
    return top + std::log(sum / n);
  };
  int n = 16;
  double previous = estimate(n);
  while (n < (1 << 24)) {
    n *= 2;
    const double next = estimate(n);
    if (std::abs(next - previous) < 1e-10) return next;
    previous = next;
  }
  throw NumericalFailure("log_f00_quadrature_small_p: trapezoid rule did not converge");
}

double mh_log_ratio_w(double w_current, double w_proposal, const ConcentrationParams& params,
                      int groups, const CorrectionSettings& settings) {
  if (!(w_current > 0.0) || !(w_proposal > 0.0)) throw InvalidInput("mh_correct_w: w must be positive");
  if (groups == 0) return 0.0;
  ConcentrationParams at_current = params;
  at_current.w = w_current;
  ConcentrationParams at_proposal = params;
  at_proposal.w = w_proposal;
  return groups * (std::log(correction_factor(at_current, settings)) -
                   std::log(correction_factor(at_proposal, settings)));
}

double mh_correct_w(double w_current, double w_proposal, const ConcentrationParams& params,
                    int groups, Rng& rng, const CorrectionSettings& settings) {
  const double log_r = mh_log_ratio_w(w_current, w_proposal, params, groups, settings);
  if (log_r >= 0.0) return w_proposal;
  return std::log(rng.uniform()) < log_r ? w_proposal : w_current;
}

}  // namespace eigenpool
