#include "eigenpool/hiermodel.hpp"

#include <algorithm>
#include <cmath>

#include "eigenpool/errors.hpp"

namespace eigenpool {

namespace {

constexpr double kSharedW = 1000.0;

Vector equally_spaced(int p) {
  Vector v(p);
  for (int i = 0; i < p; ++i) v(i) = static_cast<double>(p - 1 - i) / (p - 1);
  return v;
}

Vector unit_first(int p) {
  Vector v = Vector::Zero(p);
  v(0) = 1.0;
  return v;
}

bool pools_across_groups(ModelVariant variant) {
  return variant == ModelVariant::hierarchical || variant == ModelVariant::one_shared_eigenvector;
}

// Floors and separates an empirical spectrum so it is strictly decreasing
// and strictly positive.
SpectrumDiag regularize_spectrum(Vector values, double fallback) {
  const int p = static_cast<int>(values.size());
  double top = values.size() > 0 ? values(0) : 0.0;
  if (!(top > 0.0) || !std::isfinite(top)) {
    top = fallback;
    values.setConstant(fallback);
  }
  const double floor = 1e-6 * top;
  for (int j = 0; j < p; ++j) values(j) = std::max(values(j), floor);
  for (int j = p - 2; j >= 0; --j) {
    if (!(values(j) > values(j + 1) * (1.0 + 1e-9))) values(j) = values(j + 1) * (1.0 + 1e-6);
  }
  return SpectrumDiag(values);
}

void check_state(const ChainState& state) {
  for (int k = 0; k < state.groups(); ++k) {
    if (!state.lambda[k].strictly_decreasing() || !state.lambda[k].strictly_positive()) {
      throw NumericalFailure("eigenvalues lost strict ordering");
    }
  }
}

// One draw from the grid approximation to the density exp(logf) on (lo, hi):
// midpoints of `cells` equal cells, then uniform within the selected cell.
double grid_draw(Rng& rng, double lo, double hi, int cells, const std::function<double(double)>& logf) {
  thread_local std::vector<double> weights;
  weights.resize(cells);
  const double width = (hi - lo) / cells;
  double top = -kInf;
  for (int c = 0; c < cells; ++c) {
    weights[c] = logf(lo + (c + 0.5) * width);
    top = std::max(top, weights[c]);
  }
  if (!std::isfinite(top)) throw NumericalFailure("shape-vector grid: density is not finite");
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    total += std::exp(weights[c] - top);
    weights[c] = total;
  }
  const double target = rng.uniform() * total;
  int cell = static_cast<int>(std::lower_bound(weights.begin(), weights.end(), target) - weights.begin());
  cell = std::min(cell, cells - 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double x = lo + (cell + rng.uniform()) * width;
    if (x > lo && x < hi) return x;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void validate_groups(const std::vector<GroupData>& data, int min_n) {
  if (data.empty()) throw InvalidInput("no groups supplied");
  const int p = data.front().s.dim();
  if (p < 1) throw InvalidInput("empty sum-of-squares matrix");
  for (std::size_t k = 0; k < data.size(); ++k) {
    const GroupData& g = data[k];
    if (g.s.dim() != p) throw InvalidInput("group " + std::to_string(k) + ": dimension mismatch");
    if (g.n < min_n) {
      throw InvalidInput("group " + std::to_string(k) + ": needs n >= " + std::to_string(min_n));
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(g.s.matrix(), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, g.s.matrix().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
      throw InvalidInput("group " + std::to_string(k) + ": sum-of-squares matrix is not positive semidefinite");
    }
  }
}

void PriorConfig::validate() const {
  if (!(eta0 > 0.0) || !(tau0_sq > 0.0) || !(nu0 > 0.0) || !(sigma0_sq > 0.0) ||
      !std::isfinite(eta0 + tau0_sq + nu0 + sigma0_sq)) {
    throw InvalidInput("prior hyperparameters must be finite and strictly positive");
  }
}

std::string variant_name(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::hierarchical: return "hier";
    case ModelVariant::no_pooling: return "nopool";
    case ModelVariant::one_shared_eigenvector: return "shared1";
    case ModelVariant::common_covariance: return "common";
  }
  return "hier";
}

ModelVariant parse_variant(const std::string& name) {
  if (name == "hier" || name == "hierarchical") return ModelVariant::hierarchical;
  if (name == "nopool" || name == "no_pooling") return ModelVariant::no_pooling;
  if (name == "shared1" || name == "one_shared_eigenvector") return ModelVariant::one_shared_eigenvector;
  if (name == "common" || name == "common_covariance") return ModelVariant::common_covariance;
  throw InvalidInput("unknown model variant '" + name + "'");
}

void SamplerSettings::validate() const {
  if (phi_grid < 8 || phi_grid % 2 != 0) throw InvalidInput("phi grid must be an even number >= 8");
  if (shape_grid < 2) throw InvalidInput("shape grid must have at least 2 cells");
  if (correction.order != 1) throw InvalidInput("only the order-1 MH correction is available");
  if (!(correction.ceiling > 0.0)) throw InvalidInput("correction ceiling must be positive");
  if (predictive_sweeps < 1) throw InvalidInput("predictive sweeps must be >= 1");
}

ChainRng ChainRng::seeded(std::uint64_t seed, int group_count) {
  ChainRng rng{Rng(derive_seed(seed, 0)), {}};
  rng.groups.reserve(group_count);
  for (int k = 0; k < group_count; ++k) rng.groups.emplace_back(derive_seed(seed, 1 + static_cast<std::uint64_t>(k)));
  return rng;
}

Vector ChainState::coupling_a() const {
  if (!pools_across_groups(variant)) return Vector::Zero(dim());
  return conc.a();
}

Vector ChainState::coupling_b() const {
  if (!pools_across_groups(variant)) return Vector::Zero(dim());
  return conc.b();
}

ChainState initialize_state(const std::vector<GroupData>& data, const PriorConfig& priors,
                            ModelVariant variant, std::uint64_t seed) {
  const int p = data.front().s.dim();
  const int groups = static_cast<int>(data.size());
  ChainState state;
  state.variant = variant;
  Matrix pooled = Matrix::Zero(p, p);
  int pooled_count = 0;
  for (const GroupData& g : data) {
    if (g.n >= 2) {
      const Matrix cov = g.s.matrix() / (g.n - 1);
      pooled += cov;
      ++pooled_count;
      const EigenDecomposition eig = sym_eig(SymMatrix(cov));
      state.u.push_back(eig.vectors);
      state.lambda.push_back(regularize_spectrum(eig.values.values(), priors.sigma0_sq));
    } else {
      state.u.push_back(OrthonormalMatrix::identity(p));
      state.lambda.push_back(regularize_spectrum(Vector::Zero(p), priors.sigma0_sq));
    }
  }
  state.v = pooled_count > 0 ? sym_eig(SymMatrix(pooled / pooled_count)).vectors : OrthonormalMatrix::identity(p);
  if (p >= 2) {
    if (variant == ModelVariant::one_shared_eigenvector) {
      state.conc = ConcentrationParams(kSharedW, unit_first(p), unit_first(p));
    } else {
      state.conc = ConcentrationParams(1.0 / priors.tau0_sq, equally_spaced(p), equally_spaced(p));
    }
  } else {
    state.conc.w = 1.0 / priors.tau0_sq;
    state.conc.alpha = Vector::Zero(1);
    state.conc.beta = Vector::Zero(1);
  }
  state.rng = ChainRng::seeded(seed, groups);
  return state;
}

SamplerContext::SamplerContext(PriorConfig priors_in, SamplerSettings settings_in)
    : priors(priors_in), settings(settings_in), phi(settings_in.phi_grid) {
  priors.validate();
  settings.validate();
}

void update_group_eigenvectors(ChainState& state, const std::vector<GroupData>& data,
                               const SamplerContext& ctx) {
  const int p = state.dim();
  if (p < 2) return;
  const Vector a = state.coupling_a();
  const Vector b = state.coupling_b();
  ColumnQuadraticTarget target;
  target.q = state.v.matrix() * a.asDiagonal() * state.v.matrix().transpose();
  target.q = 0.5 * (target.q + target.q.transpose());
  target.q_weight = b;
  for (int k = 0; k < state.groups(); ++k) {
    Rng& rng = state.rng.groups[k];
    target.s = data[k].s.matrix();
    target.s_weight = -0.5 * state.lambda[k].values().cwiseInverse();
    if (ctx.settings.group_pairs == PairSchedule::single_pair) {
      const auto [j1, j2] = random_pair(p, rng);
      state.u[k] = update_column_pair(state.u[k], j1, j2, target, rng, ctx.phi);
    } else {
      state.u[k] = gibbs_sweep(state.u[k], target, rng, 1, ctx.phi);
    }
  }
}

void update_group_eigenvalues(ChainState& state, const std::vector<GroupData>& data,
                              const SamplerContext& ctx) {
  const int p = state.dim();
  const double shape_base = 0.5 * ctx.priors.nu0;
  const double rate_base = 0.5 * ctx.priors.nu0 * ctx.priors.sigma0_sq;
  for (int k = 0; k < state.groups(); ++k) {
    Rng& rng = state.rng.groups[k];
    Vector lambda = state.lambda[k].values();
    const Matrix su = data[k].s.matrix() * state.u[k].matrix();
    const double shape = shape_base + 0.5 * (data[k].n - 1);
    for (int j = 0; j < p; ++j) {
      const double rate = rate_base + 0.5 * std::max(0.0, state.u[k].col(j).dot(su.col(j)));
      const double upper = j == 0 ? kInf : lambda(j - 1);
      const double lower = j == p - 1 ? 0.0 : lambda(j + 1);
      // 1/lambda ~ gamma(shape, rate) restricted to (1/upper, 1/lower).
      const double x_lo = std::isinf(upper) ? 0.0 : 1.0 / upper;
      const double x_hi = lower > 0.0 ? 1.0 / lower : kInf;
      bool done = false;
      for (int attempt = 0; attempt < 100 && !done; ++attempt) {
        const double x = truncated_gamma(rng, shape, rate, x_lo, x_hi);
        const double value = 1.0 / x;
        if (value > lower && value < upper && std::isfinite(value)) {
          lambda(j) = value;
          done = true;
        }
      }
      if (!done) throw NumericalFailure("eigenvalue truncation interval is numerically empty");
    }
    state.lambda[k] = SpectrumDiag(lambda);
  }
}

void update_v(ChainState& state, const SamplerContext& ctx) {
  const int p = state.dim();
  if (p < 2) return;
  const Vector b = state.conc.b();
  ColumnQuadraticTarget target;
  target.q = Matrix::Zero(p, p);
  for (const OrthonormalMatrix& u : state.u) target.q += u.matrix() * b.asDiagonal() * u.matrix().transpose();
  target.q = 0.5 * (target.q + target.q.transpose());
  target.q_weight = state.conc.a();
  state.v = gibbs_sweep(state.v, target, state.rng.master, 1, ctx.phi);
}

Matrix compute_m(const ChainState& state) {
  const int p = state.dim();
  Matrix m = Matrix::Zero(p, p);
  for (const OrthonormalMatrix& u : state.u) {
    const Matrix x = state.v.matrix().transpose() * u.matrix();
    m += x.array().square().matrix();
  }
  return m;
}

void update_w(ChainState& state, const Matrix& m, const SamplerContext& ctx) {
  const int p = state.dim();
  const int groups = state.groups();
  const Matrix gap = groups * Matrix::Identity(p, p) - m;
  const double coupling = state.conc.alpha.dot(gap * state.conc.beta);
  const double shape = ctx.priors.w_shape() + 0.5 * groups * p * (p - 1) / 2.0;
  const double rate = ctx.priors.w_rate() + std::max(0.0, coupling);
  if (!(rate > 0.0) || coupling < -1e-8 * std::max(1.0, static_cast<double>(groups))) {
    throw NumericalFailure("update_w: non-positive gamma rate");
  }
  const double proposal = state.rng.master.gamma(shape, rate);
  if (ctx.settings.mh_correction && groups > 0 && state.conc.strictly_ordered()) {
    state.conc.w = mh_correct_w(state.conc.w, proposal, state.conc, groups, state.rng.master,
                                ctx.settings.correction);
  } else {
    state.conc.w = proposal;
  }
}

double alpha_log_conditional(const ChainState& state, const Matrix& m, int i, double x) {
  const int groups = state.groups();
  const Matrix gap = groups * Matrix::Identity(m.rows(), m.cols()) - m;
  const double slope = gap.row(i).dot(state.conc.beta);
  double value = -state.conc.w * x * slope;
  for (int j = 0; j < state.conc.alpha.size(); ++j) {
    if (j != i) value += 0.5 * groups * std::log(std::abs(x - state.conc.alpha(j)));
  }
  return value;
}

double beta_log_conditional(const ChainState& state, const Matrix& m, int j, double x) {
  const int groups = state.groups();
  const Matrix gap = groups * Matrix::Identity(m.rows(), m.cols()) - m;
  const double slope = gap.col(j).dot(state.conc.alpha);
  double value = -state.conc.w * x * slope;
  for (int i = 0; i < state.conc.beta.size(); ++i) {
    if (i != j) value += 0.5 * groups * std::log(std::abs(x - state.conc.beta(i)));
  }
  return value;
}

void update_shape_vectors(ChainState& state, const Matrix& m, const SamplerContext& ctx) {
  const int p = state.dim();
  Rng& rng = state.rng.master;
  const int cells = ctx.settings.shape_grid;
  for (int i = 1; i + 1 < p; ++i) {
    const double lo = state.conc.alpha(i + 1);
    const double hi = state.conc.alpha(i - 1);
    state.conc.alpha(i) = grid_draw(rng, lo, hi, cells,
                                    [&](double x) { return alpha_log_conditional(state, m, i, x); });
  }
  for (int j = 1; j + 1 < p; ++j) {
    const double lo = state.conc.beta(j + 1);
    const double hi = state.conc.beta(j - 1);
    state.conc.beta(j) = grid_draw(rng, lo, hi, cells,
                                   [&](double x) { return beta_log_conditional(state, m, j, x); });
  }
}

void gibbs_iteration(ChainState& state, const std::vector<GroupData>& data, const SamplerContext& ctx) {
  update_group_eigenvectors(state, data, ctx);
  update_group_eigenvalues(state, data, ctx);
  if (state.dim() >= 2 && pools_across_groups(state.variant)) {
    update_v(state, ctx);
    if (state.variant == ModelVariant::hierarchical) {
      const Matrix m = compute_m(state);
      update_w(state, m, ctx);
      update_shape_vectors(state, m, ctx);
    }
  }
  check_state(state);
}

SymMatrix sample_wishart(const SymMatrix& scale, int df, Rng& rng) {
  const int p = scale.dim();
  if (df < p) throw InvalidInput("sample_wishart: df < p gives a rank-deficient draw");
  const Eigen::LLT<Matrix> llt(scale.matrix());
  if (llt.info() != Eigen::Success) throw InvalidInput("sample_wishart: scale is not positive definite");
  Matrix a = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(df - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix la = llt.matrixL() * a;
  return SymMatrix(la * la.transpose(), 1e-6);
}

SymMatrix sample_scatter(const SymMatrix& scale, int df, Rng& rng) {
  const int p = scale.dim();
  if (df < 0) throw InvalidInput("sample_scatter: negative df");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(scale.matrix());
  const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Matrix total = Matrix::Zero(p, p);
  Vector z(p);
  for (int t = 0; t < df; ++t) {
    for (int i = 0; i < p; ++i) z(i) = rng.normal();
    const Vector x = root * z;
    total += x * x.transpose();
  }
  return SymMatrix(total, 1e-6);
}

Matrix PosteriorSample::sigma(int k) const {
  const Matrix& u_k = u[k].matrix();
  return u_k * lambda[k].values().asDiagonal() * u_k.transpose();
}

Vector PosteriorSample::a() const { return std::sqrt(w) * alpha; }
Vector PosteriorSample::b() const { return std::sqrt(w) * beta; }

PosteriorSample snapshot(const ChainState& state, long iteration) {
  PosteriorSample sample;
  sample.iteration = iteration;
  sample.variant = state.variant;
  sample.u = state.u;
  sample.lambda = state.lambda;
  sample.v = state.v;
  sample.w = state.conc.w;
  sample.alpha = state.conc.alpha;
  sample.beta = state.conc.beta;
  return sample;
}

void ChainControls::validate() const {
  if (iterations < 0 || burn_in < 0) throw InvalidInput("iteration counts must be non-negative");
  if (thin < 1) throw InvalidInput("thin must be >= 1");
  if (iterations > 0 && burn_in >= iterations) throw InvalidInput("burn-in must be smaller than iterations");
  settings.validate();
}

void run_chain(const std::vector<GroupData>& data, const PriorConfig& priors, ModelVariant variant,
               const ChainControls& controls, const SampleSink& sink, const IterationObserver& observer) {
  controls.validate();
  priors.validate();
  validate_groups(data, 2);
  const SamplerContext ctx(priors, controls.settings);

  if (variant == ModelVariant::common_covariance) {
    const int p = data.front().s.dim();
    Matrix total = Matrix::Zero(p, p);
    int df = 0;
    for (const GroupData& g : data) {
      total += g.s.matrix();
      df += g.n - 1;
    }
    const std::vector<GroupData> merged{GroupData{df + 1, SymMatrix(total)}};
    ChainState state = initialize_state(merged, priors, ModelVariant::no_pooling, controls.seed);
    const int groups = static_cast<int>(data.size());
    for (long it = 1; it <= controls.iterations; ++it) {
      gibbs_iteration(state, merged, ctx);
      if (observer) observer(it, state);
      if (controls.saves(it) && sink) {
        PosteriorSample sample = snapshot(state, it);
        sample.variant = ModelVariant::common_covariance;
        sample.u.assign(groups, state.u.front());
        sample.lambda.assign(groups, state.lambda.front());
        sample.v = state.u.front();
        sink(sample);
      }
    }
    return;
  }

  ChainState state = initialize_state(data, priors, variant, controls.seed);
  for (long it = 1; it <= controls.iterations; ++it) {
    gibbs_iteration(state, data, ctx);
    if (observer) observer(it, state);
    if (controls.saves(it) && sink) sink(snapshot(state, it));
  }
}

std::vector<PosteriorSample> run_chain_collect(const std::vector<GroupData>& data, const PriorConfig& priors,
                                               ModelVariant variant, const ChainControls& controls) {
  std::vector<PosteriorSample> out;
  run_chain(data, priors, variant, controls, [&](const PosteriorSample& s) { out.push_back(s); });
  return out;
}

std::vector<GroupData> posterior_predictive_groups(const PosteriorSample& sample,
                                                   const std::vector<GroupData>& data, Rng& rng,
                                                   const SamplerSettings& settings) {
  if (static_cast<int>(data.size()) != sample.groups()) {
    throw InvalidInput("posterior_predictive_groups: group count mismatch");
  }
  const int p = sample.dim();
  const PhiSampler phi(settings.phi_grid);
  std::optional<BinghamParams> bingham;
  if (p >= 2 && pools_across_groups(sample.variant)) {
    bingham.emplace(SpectrumDiag(sample.a()), SpectrumDiag(sample.b()), sample.v);
  }
  std::vector<GroupData> out;
  out.reserve(data.size());
  for (int k = 0; k < sample.groups(); ++k) {
    OrthonormalMatrix u;
    switch (sample.variant) {
      case ModelVariant::hierarchical:
      case ModelVariant::one_shared_eigenvector:
        u = bingham ? gibbs_sweep_bingham(sample.u[k], *bingham, rng, settings.predictive_sweeps, phi)
                    : sample.u[k];
        break;
      case ModelVariant::no_pooling: u = haar_orthonormal(p, rng); break;
      case ModelVariant::common_covariance: u = sample.u[k]; break;
    }
    const Matrix& um = u.matrix();
    const SymMatrix sigma(um * sample.lambda[k].values().asDiagonal() * um.transpose(), 1e-6);
    const int df = data[k].n - 1;
    SymMatrix s = df >= p ? sample_wishart(sigma, df, rng) : sample_scatter(sigma, std::max(df, 0), rng);
    out.push_back(GroupData{data[k].n, std::move(s)});
  }
  return out;
}

OrthonormalMatrix point_estimate_v(const std::vector<PosteriorSample>& samples) {
  if (samples.empty()) throw InvalidInput("point_estimate_v: no samples");
  const int p = samples.front().dim();
  Matrix total = Matrix::Zero(p, p);
  for (const PosteriorSample& s : samples) {
    const Matrix& v = s.v.matrix();
    const Vector a = s.variant == ModelVariant::hierarchical || s.variant == ModelVariant::one_shared_eigenvector
                         ? s.a()
                         : Vector(s.lambda.front().values());
    total += v * a.asDiagonal() * v.transpose();
  }
  return sym_eig(SymMatrix(total / static_cast<double>(samples.size()), 1e-6)).vectors;
}

Matrix posterior_mean_sigma(const std::vector<PosteriorSample>& samples, int k) {
  if (samples.empty()) throw InvalidInput("posterior_mean_sigma: no samples");
  Matrix total = Matrix::Zero(samples.front().dim(), samples.front().dim());
  for (const PosteriorSample& s : samples) total += s.sigma(k);
  return total / static_cast<double>(samples.size());
}

SymMatrix centered_scatter(const Matrix& y) {
  if (y.rows() == 0) return SymMatrix::zeros(static_cast<int>(y.cols()));
  const Matrix centered = y.rowwise() - y.colwise().mean();
  return SymMatrix(centered.transpose() * centered, 1e-6);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  const int p = spec.dim;
  const int groups = spec.groups;
  if (p < 1 || groups < 1) throw InvalidInput("generate_synthetic: need p >= 1 and K >= 1");
  if (spec.n.size() != 1 && static_cast<int>(spec.n.size()) != groups) {
    throw InvalidInput("generate_synthetic: n needs one entry or one per group");
  }
  if (spec.eigenvalues.size() != 1 && static_cast<int>(spec.eigenvalues.size()) != groups) {
    throw InvalidInput("generate_synthetic: eigenvalues need one entry or one per group");
  }
  if (!(spec.w >= 0.0)) throw InvalidInput("generate_synthetic: w must be non-negative");
  Rng rng(derive_seed(spec.seed, 0x5157));

  SyntheticData out;
  out.truth.v = spec.v ? *spec.v : haar_orthonormal(p, rng);
  if (out.truth.v.rows() != p || out.truth.v.cols() != p) throw InvalidInput("generate_synthetic: V dimension");
  out.truth.w = spec.w;
  out.truth.alpha = spec.alpha;
  out.truth.beta = spec.beta;

  std::optional<BinghamParams> bingham;
  if (spec.w > 0.0 && p >= 2) {
    const ConcentrationParams conc(spec.w, spec.alpha, spec.beta);
    bingham.emplace(SpectrumDiag(conc.a()), SpectrumDiag(conc.b()), out.truth.v);
  }
  const PhiSampler phi;
  for (int k = 0; k < groups; ++k) {
    OrthonormalMatrix u = haar_orthonormal(p, rng);
    if (bingham) u = gibbs_sweep_bingham(u, *bingham, rng, spec.bingham_sweeps, phi);
    const SpectrumDiag& lambda = spec.eigenvalues.size() == 1 ? spec.eigenvalues.front() : spec.eigenvalues[k];
    if (lambda.size() != p || !lambda.strictly_positive()) {
      throw InvalidInput("generate_synthetic: eigenvalues must be positive with length p");
    }
    const int n = spec.n.size() == 1 ? spec.n.front() : spec.n[k];
    if (n < 1) throw InvalidInput("generate_synthetic: n must be >= 1");
    const Matrix& um = u.matrix();
    const SymMatrix sigma(um * lambda.values().asDiagonal() * um.transpose(), 1e-6);

    GroupData group;
    group.n = n;
    if (spec.raw_observations) {
      const Matrix root = um * lambda.values().cwiseSqrt().asDiagonal();
      Matrix y(n, p);
      Vector z(p);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z(j) = rng.normal();
        y.row(i) = (root * z).transpose();
      }
      group.s = centered_scatter(y);
      out.observations.push_back(std::move(y));
    } else {
      group.s = n - 1 >= p ? sample_wishart(sigma, n - 1, rng) : sample_scatter(sigma, n - 1, rng);
    }
    out.groups.push_back(std::move(group));
    out.truth.u.push_back(std::move(u));
    out.truth.lambda.push_back(lambda);
  }
  return out;
}

}  // namespace eigenpool
