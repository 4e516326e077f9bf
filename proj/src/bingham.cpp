#include "eigenpool/bingham.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigenpool/errors.hpp"

namespace eigenpool {

BinghamParams::BinghamParams(SpectrumDiag a_in, SpectrumDiag b_in, OrthonormalMatrix v_in)
    : a(std::move(a_in)), b(std::move(b_in)), v(std::move(v_in)) {
  const int p = v.rows();
  if (v.cols() != p) throw InvalidInput("BinghamParams: V must be square");
  if (a.size() != p || b.size() != p) throw InvalidInput("BinghamParams: dimension mismatch");
  if (a[p - 1] != 0.0 || b[p - 1] != 0.0) throw InvalidInput("BinghamParams: a_p and b_p must be zero");
}

Matrix ColumnQuadraticTarget::column_matrix(int j) const {
  Matrix c = q_weight(j) * q;
  if (s.size() > 0) c += s_weight(j) * s;
  return c;
}

PairConditionalParams ColumnQuadraticTarget::pair_conditional(const OrthonormalMatrix& n, int j1,
                                                             int j2) const {
  const Matrix& basis = n.matrix();
  const Matrix q_proj = basis.transpose() * q * basis;
  Matrix g = q_weight(j1) * q_proj;
  Matrix h = q_weight(j2) * q_proj;
  if (s.size() > 0) {
    const Matrix s_proj = basis.transpose() * s * basis;
    g += s_weight(j1) * s_proj;
    h += s_weight(j2) * s_proj;
  }
  return {SymMatrix(g, 1e-6), SymMatrix(h, 1e-6)};
}

double ColumnQuadraticTarget::log_density(const OrthonormalMatrix& u) const {
  const Matrix qu = q * u.matrix();
  double total = 0.0;
  for (int j = 0; j < u.cols(); ++j) total += q_weight(j) * u.col(j).dot(qu.col(j));
  if (s.size() > 0) {
    const Matrix su = s * u.matrix();
    for (int j = 0; j < u.cols(); ++j) total += s_weight(j) * u.col(j).dot(su.col(j));
  }
  return total;
}

ColumnQuadraticTarget bingham_target(const BinghamParams& params) {
  const Matrix& v = params.v.matrix();
  ColumnQuadraticTarget target;
  target.q = v * params.a.values().asDiagonal() * v.transpose();
  target.q = 0.5 * (target.q + target.q.transpose());
  target.q_weight = params.b.values();
  return target;
}

double log_density_unnorm(const OrthonormalMatrix& u, const BinghamParams& params) {
  if (u.rows() != params.dim() || u.cols() != params.dim()) {
    throw InvalidInput("log_density_unnorm: dimension mismatch");
  }
  const Matrix x = params.v.matrix().transpose() * u.matrix();
  return params.a.values().dot(x.array().square().matrix() * params.b.values());
}

PhiSampler::PhiSampler(int grid_points) {
  if (grid_points < 8 || grid_points % 2 != 0) {
    throw InvalidInput("PhiSampler: grid size must be an even number >= 8");
  }
  half_cells_ = grid_points / 2;
  width_ = std::numbers::pi / half_cells_;
  cos2_.resize(half_cells_ + 1);
  sin2_.resize(half_cells_ + 1);
  cross_.resize(half_cells_ + 1);
  for (int i = 0; i <= half_cells_; ++i) {
    const double phi = i * width_;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    cos2_[i] = c * c;
    sin2_[i] = s * s;
    cross_[i] = c * s;
  }
}

PhiDraw PhiSampler::sample(const PairConditionalParams& params, Rng& rng) const {
  const Matrix& g = params.g.matrix();
  const Matrix& h = params.h.matrix();
  const double c_cc = g(0, 0) + h(1, 1);
  const double c_ss = h(0, 0) + g(1, 1);
  const double c_cs = g(0, 1) + g(1, 0) - h(0, 1) - h(1, 0);

  thread_local std::vector<double> logf;
  thread_local std::vector<double> cum;
  logf.resize(half_cells_ + 1);
  cum.resize(half_cells_);

  double top = -kInf;
  for (int i = 0; i <= half_cells_; ++i) {
    logf[i] = c_cc * cos2_[i] + c_ss * sin2_[i] + c_cs * cross_[i];
    top = std::max(top, logf[i]);
  }
  if (!std::isfinite(top)) throw NumericalFailure("sample_phi: non-finite density");

  double total = 0.0;
  for (int i = 0; i < half_cells_; ++i) {
    const double d = logf[i + 1] - logf[i];
    const double f = std::exp(logf[i] - top);
    const double shape = std::abs(d) < 1e-10 ? 1.0 + 0.5 * d : std::expm1(d) / d;
    total += f * shape;
    cum[i] = total;
  }

  const double target = rng.uniform() * total;
  int cell = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
  cell = std::min(cell, half_cells_ - 1);
  const double before = cell == 0 ? 0.0 : cum[cell - 1];
  const double f = std::exp(logf[cell] - top);
  const double d = logf[cell + 1] - logf[cell];
  const double r = std::max(0.0, target - before) / f;
  double t = std::abs(d) < 1e-10 ? r : std::log1p(r * d) / d;
  if (!std::isfinite(t)) t = 0.5;
  t = std::clamp(t, 0.0, 1.0);

  double phi = (cell + t) * width_;
  if (rng.coin()) phi += std::numbers::pi;
  const int s = rng.coin() ? 1 : -1;
  return {phi, s};
}

PhiDraw sample_phi(const PairConditionalParams& params, Rng& rng, int grid_points) {
  thread_local PhiSampler cached(PhiSampler::kDefaultGridPoints);
  if (cached.grid_points() != grid_points) cached = PhiSampler(grid_points);
  return cached.sample(params, rng);
}

Matrix rotation_z(const PhiDraw& draw) {
  const double c = std::cos(draw.phi);
  const double s = std::sin(draw.phi);
  Matrix z(2, 2);
  z << c, draw.s * s, s, -draw.s * c;
  return z;
}

OrthonormalMatrix update_column_pair(const OrthonormalMatrix& u, int j1, int j2,
                                     const PairConditionalParams& params, Rng& rng,
                                     const PhiSampler& sampler) {
  if (j1 == j2) throw InvalidInput("update_column_pair: column indices must differ");
  const OrthonormalMatrix n = null_space(u, j1, j2);
  const PhiDraw draw = sampler.sample(params, rng);
  return u.replace_pair(j1, j2, n.matrix() * rotation_z(draw));
}

OrthonormalMatrix update_column_pair(const OrthonormalMatrix& u, int j1, int j2,
                                     const ColumnQuadraticTarget& target, Rng& rng,
                                     const PhiSampler& sampler) {
  if (j1 == j2) throw InvalidInput("update_column_pair: column indices must differ");
  const OrthonormalMatrix n = null_space(u, j1, j2);
  const PhiDraw draw = sampler.sample(target.pair_conditional(n, j1, j2), rng);
  return u.replace_pair(j1, j2, n.matrix() * rotation_z(draw));
}

std::vector<std::pair<int, int>> random_matching(int p, Rng& rng) {
  std::vector<int> order(p);
  for (int i = 0; i < p; ++i) order[i] = i;
  for (int i = p - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.index(static_cast<std::size_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(p / 2);
  for (int i = 0; i + 1 < p; i += 2) pairs.emplace_back(order[i], order[i + 1]);
  return pairs;
}

std::pair<int, int> random_pair(int p, Rng& rng) {
  const auto j1 = static_cast<int>(rng.index(p));
  auto j2 = static_cast<int>(rng.index(p - 1));
  if (j2 >= j1) ++j2;
  return {j1, j2};
}

OrthonormalMatrix gibbs_sweep(const OrthonormalMatrix& u, const ColumnQuadraticTarget& target,
                              Rng& rng, int sweeps, const PhiSampler& sampler) {
  if (sweeps < 1) throw InvalidInput("gibbs_sweep: sweeps must be >= 1");
  if (u.rows() != target.dim() || u.cols() != target.dim()) {
    throw InvalidInput("gibbs_sweep: dimension mismatch");
  }
  OrthonormalMatrix current = u;
  if (u.cols() < 2) return current;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (const auto& [j1, j2] : random_matching(u.cols(), rng)) {
      current = update_column_pair(current, j1, j2, target, rng, sampler);
    }
  }
  return current;
}

OrthonormalMatrix gibbs_sweep_bingham(const OrthonormalMatrix& u, const BinghamParams& params,
                                      Rng& rng, int sweeps, const PhiSampler& sampler) {
  return gibbs_sweep(u, bingham_target(params), rng, sweeps, sampler);
}

OrthonormalMatrix mode_set(const BinghamParams& params) {
  Matrix v = params.v.matrix();
  canonicalize_signs(v);
  return OrthonormalMatrix(v);
}

}  // namespace eigenpool
