#include "eigenpool/copula.hpp"

#include <algorithm>
#include <cmath>

#include "eigenpool/errors.hpp"

namespace eigenpool {

namespace {

using BoolColumn = Eigen::Array<bool, Eigen::Dynamic, 1>;

RankBounds scan_bounds(const Matrix& y, const Matrix& z, const Mask& observed, int col, int i) {
  RankBounds b{-kInf, kInf};
  const double yi = y(i, col);
  for (Eigen::Index l = 0; l < y.rows(); ++l) {
    if (l == i || !observed(l, col)) continue;
    const double yl = y(l, col);
    if (yl < yi) b.lower = std::max(b.lower, z(l, col));
    else if (yl > yi) b.upper = std::min(b.upper, z(l, col));
  }
  return b;
}

// Observed entries of one column grouped by tie level, with the running
// extremes of z per level. Under rank concordance the bounds for a level are
// the max of the level below and the min of the level above, so a
// coordinate update costs O(1) except when it moves its level's extreme.
class ColumnLevels {
 public:
  ColumnLevels(const Matrix& y, const Matrix& z, const Mask& observed, int col) : col_(col) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (observed(i, col)) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a, col) < y(b, col); });
    level_of_.assign(y.rows(), -1);
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (t == 0 || y(idx[t], col) != y(idx[t - 1], col)) members_.emplace_back();
      members_.back().push_back(idx[t]);
      level_of_[idx[t]] = static_cast<int>(members_.size()) - 1;
    }
    max_.resize(members_.size());
    min_.resize(members_.size());
    for (std::size_t l = 0; l < members_.size(); ++l) refresh(z, static_cast<int>(l));
    for (std::size_t l = 1; l < members_.size(); ++l) {
      if (!(min_[l] > max_[l - 1])) throw NumericalFailure("update_latent: latent state is not rank-concordant");
    }
  }

  bool observed(Eigen::Index i) const { return level_of_[i] >= 0; }

  RankBounds bounds(Eigen::Index i) const {
    const int l = level_of_[i];
    const int last = static_cast<int>(members_.size()) - 1;
    return RankBounds{l > 0 ? max_[l - 1] : -kInf, l < last ? min_[l + 1] : kInf};
  }

  void record(const Matrix& z, Eigen::Index i, double old_value) {
    const int l = level_of_[i];
    const double v = z(i, col_);
    if (v >= max_[l]) max_[l] = v;
    else if (old_value == max_[l]) refresh(z, l);
    if (v <= min_[l]) min_[l] = v;
    else if (old_value == min_[l]) refresh(z, l);
  }

 private:
  void refresh(const Matrix& z, int l) {
    max_[l] = -kInf;
    min_[l] = kInf;
    for (Eigen::Index i : members_[l]) {
      max_[l] = std::max(max_[l], z(i, col_));
      min_[l] = std::min(min_[l], z(i, col_));
    }
  }

  int col_;
  std::vector<int> level_of_;
  std::vector<std::vector<Eigen::Index>> members_;
  std::vector<double> max_;
  std::vector<double> min_;
};

// Latent draws use their own streams, apart from the chain's master and
// group streams.
constexpr std::uint64_t kLatentStreamBase = 0x10000;

}  // namespace

OrdinalTable OrdinalTable::complete(std::vector<Matrix> values) {
  OrdinalTable t;
  t.values = std::move(values);
  for (const Matrix& m : t.values) t.observed.push_back(Mask::Constant(m.rows(), m.cols(), true));
  return t;
}

void OrdinalTable::validate() const {
  if (values.empty()) throw InvalidInput("ordinal table has no groups");
  if (observed.size() != values.size()) throw InvalidInput("ordinal table: mask count mismatch");
  const int p = dim();
  if (p < 1) throw InvalidInput("ordinal table has no variables");
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Matrix& y = values[k];
    if (y.cols() != p) throw InvalidInput("ordinal table: group " + std::to_string(k) + " has a different width");
    if (y.rows() < 1) throw InvalidInput("ordinal table: group " + std::to_string(k) + " is empty");
    if (observed[k].rows() != y.rows() || observed[k].cols() != y.cols()) {
      throw InvalidInput("ordinal table: mask shape mismatch");
    }
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (observed[k](i, j) && !std::isfinite(y(i, j))) throw InvalidInput("ordinal table: non-finite value");
      }
    }
  }
}

RankBounds rank_bounds(const Vector& y, const Vector& z, const BoolColumn& observed, int i) {
  if (y.size() != z.size() || observed.size() != y.size() || i < 0 || i >= y.size()) {
    throw InvalidInput("rank_bounds: size mismatch");
  }
  const RankBounds b = scan_bounds(Matrix(y), Matrix(z), Mask(observed), 0, i);
  if (!(b.lower < b.upper)) throw NumericalFailure("rank_bounds: latent state is not rank-concordant");
  return b;
}

void check_rank_concordance(const LatentState& state, const OrdinalTable& data) {
  for (int k = 0; k < data.groups(); ++k) {
    const Matrix& y = data.values[k];
    const Matrix& z = state.z[k];
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        if (data.observed[k](i, j)) idx.push_back(i);
      }
      std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a, j) < y(b, j); });
      // Walk tie levels: every z of a level must exceed the max z of all
      // lower levels.
      double below = -kInf;
      std::size_t start = 0;
      while (start < idx.size()) {
        std::size_t end = start;
        double level_max = -kInf;
        while (end < idx.size() && y(idx[end], j) == y(idx[start], j)) {
          const double zi = z(idx[end], j);
          if (!(zi > below)) throw NumericalFailure("latent state lost rank concordance");
          level_max = std::max(level_max, zi);
          ++end;
        }
        below = std::max(below, level_max);
        start = end;
      }
    }
  }
}

LatentState initial_latent(const OrdinalTable& data) {
  LatentState state;
  for (int k = 0; k < data.groups(); ++k) {
    const Matrix& y = data.values[k];
    Matrix z = Matrix::Zero(y.rows(), y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        if (data.observed[k](i, j)) idx.push_back(i);
      }
      std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return y(a, j) < y(b, j); });
      const double m = static_cast<double>(idx.size());
      std::size_t start = 0;
      while (start < idx.size()) {
        std::size_t end = start;
        while (end < idx.size() && y(idx[end], j) == y(idx[start], j)) ++end;
        const double avg_rank = 0.5 * (static_cast<double>(start) + static_cast<double>(end - 1)) + 1.0;
        const double score = normal_quantile(avg_rank / (m + 1.0));
        for (std::size_t t = start; t < end; ++t) z(idx[t], j) = score;
        start = end;
      }
    }
    state.z.push_back(std::move(z));
  }
  return state;
}

void update_latent(LatentState& state, const std::vector<SymMatrix>& sigma, const OrdinalTable& data,
                   std::vector<Rng>& rngs) {
  if (static_cast<int>(sigma.size()) != data.groups() || static_cast<int>(rngs.size()) != data.groups() ||
      static_cast<int>(state.z.size()) != data.groups()) {
    throw InvalidInput("update_latent: group count mismatch");
  }
  const int p = data.dim();
  for (int k = 0; k < data.groups(); ++k) {
    const Eigen::LLT<Matrix> llt(sigma[k].matrix());
    if (llt.info() != Eigen::Success) throw InvalidInput("update_latent: covariance is not positive definite");
    const Matrix omega = llt.solve(Matrix::Identity(p, p));
    const Matrix& y = data.values[k];
    const Mask& observed = data.observed[k];
    Matrix& z = state.z[k];
    Rng& rng = rngs[k];
    std::vector<ColumnLevels> levels;
    levels.reserve(p);
    for (int j = 0; j < p; ++j) levels.emplace_back(y, z, observed, j);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (int j = 0; j < p; ++j) {
        const double prec = omega(j, j);
        const double cross = omega.row(j).dot(z.row(i)) - prec * z(i, j);
        const double mean = -cross / prec;
        const double sd = 1.0 / std::sqrt(prec);
        if (!levels[j].observed(i)) {
          z(i, j) = mean + sd * rng.normal();
          continue;
        }
        const RankBounds b = levels[j].bounds(i);
        const double old_value = z(i, j);
        z(i, j) = truncated_normal(rng, mean, sd, b.lower, b.upper);
        levels[j].record(z, i, old_value);
      }
    }
  }
}

Matrix extract_correlation(const SymMatrix& sigma) {
  const Matrix& s = sigma.matrix();
  const Vector d = s.diagonal();
  if ((d.array() <= 0.0).any()) throw InvalidInput("extract_correlation: non-positive diagonal");
  const Vector inv = d.cwiseSqrt().cwiseInverse();
  Matrix c = inv.asDiagonal() * s * inv.asDiagonal();
  c = 0.5 * (c + c.transpose());
  c.diagonal().setOnes();
  return c;
}

std::vector<GroupData> latent_group_data(const LatentState& state) {
  std::vector<GroupData> out;
  out.reserve(state.z.size());
  for (const Matrix& z : state.z) out.push_back(GroupData{static_cast<int>(z.rows()), centered_scatter(z)});
  return out;
}

void run_copula_chain(const OrdinalTable& data, const PriorConfig& priors, ModelVariant variant,
                      const ChainControls& controls, const SampleSink& sink, const IterationObserver& observer) {
  data.validate();
  controls.validate();
  priors.validate();
  const SamplerContext ctx(priors, controls.settings);
  const int groups = data.groups();
  const int p = data.dim();
  const bool common = variant == ModelVariant::common_covariance;

  LatentState latent = initial_latent(data);
  std::vector<Rng> latent_rngs;
  for (int k = 0; k < groups; ++k) {
    latent_rngs.emplace_back(derive_seed(controls.seed, kLatentStreamBase + static_cast<std::uint64_t>(k)));
  }

  auto model_data = [&]() {
    std::vector<GroupData> per_group = latent_group_data(latent);
    if (!common) return per_group;
    Matrix total = Matrix::Zero(p, p);
    int df = 0;
    for (const GroupData& g : per_group) {
      total += g.s.matrix();
      df += g.n - 1;
    }
    return std::vector<GroupData>{GroupData{df + 1, SymMatrix(total, 1e-6)}};
  };

  std::vector<GroupData> current = model_data();
  ChainState state = initialize_state(current, priors, common ? ModelVariant::no_pooling : variant, controls.seed);

  std::vector<SymMatrix> sigma(groups);
  for (long it = 1; it <= controls.iterations; ++it) {
    for (int k = 0; k < groups; ++k) {
      const int src = common ? 0 : k;
      const Matrix& u = state.u[src].matrix();
      sigma[k] = SymMatrix(u * state.lambda[src].values().asDiagonal() * u.transpose(), 1e-6);
    }
    update_latent(latent, sigma, data, latent_rngs);
    check_rank_concordance(latent, data);
    current = model_data();
    gibbs_iteration(state, current, ctx);
    if (observer) observer(it, state);
    if (controls.saves(it) && sink) {
      PosteriorSample sample = snapshot(state, it);
      if (common) {
        sample.variant = ModelVariant::common_covariance;
        sample.u.assign(groups, state.u.front());
        sample.lambda.assign(groups, state.lambda.front());
        sample.v = state.u.front();
      }
      for (int k = 0; k < groups; ++k) sample.correlation.push_back(extract_correlation(SymMatrix(sample.sigma(k), 1e-6)));
      sink(sample);
    }
  }
}

std::vector<PosteriorSample> run_copula_chain_collect(const OrdinalTable& data, const PriorConfig& priors,
                                                      ModelVariant variant, const ChainControls& controls) {
  std::vector<PosteriorSample> out;
  run_copula_chain(data, priors, variant, controls, [&](const PosteriorSample& s) { out.push_back(s); });
  return out;
}

}  // namespace eigenpool
