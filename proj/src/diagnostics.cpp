#include "eigenpool/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "eigenpool/errors.hpp"

namespace eigenpool {

LogAbTraces trace_log_ab(const std::vector<PosteriorSample>& samples) {
  LogAbTraces out;
  out.mean.reserve(samples.size());
  out.sd.reserve(samples.size());
  for (const PosteriorSample& s : samples) {
    const int p = s.dim();
    if (p < 2) throw InvalidInput("trace_log_ab: needs p >= 2");
    const Vector a = s.a();
    const Vector b = s.b();
    double sum = 0.0;
    double sum_sq = 0.0;
    const int count = (p - 1) * (p - 1);
    for (int i = 0; i + 1 < p; ++i) {
      for (int j = 0; j + 1 < p; ++j) {
        const double ab = a(i) * b(j);
        if (!(ab > 0.0)) throw InvalidInput("trace_log_ab: non-positive entry in the non-zero block of A∘B");
        const double l = std::log(ab);
        sum += l;
        sum_sq += l * l;
      }
    }
    const double mean = sum / count;
    out.mean.push_back(mean);
    out.sd.push_back(std::sqrt(std::max(0.0, sum_sq / count - mean * mean)));
  }
  return out;
}

Vector similarity_stat(const OrthonormalMatrix& v, const std::vector<OrthonormalMatrix>& u_list) {
  if (u_list.empty()) throw InvalidInput("similarity_stat: no matrices");
  const int p = v.rows();
  Vector t = Vector::Zero(v.cols());
  for (const OrthonormalMatrix& u : u_list) {
    if (u.rows() != p || u.cols() != v.cols()) throw InvalidInput("similarity_stat: dimension mismatch");
    for (int j = 0; j < v.cols(); ++j) {
      const double d = v.col(j).dot(u.col(j));
      t(j) += d * d;
    }
  }
  t /= static_cast<double>(u_list.size());
  return t.cwiseMin(1.0);
}

Vector data_similarity(const std::vector<GroupData>& data) {
  if (data.empty()) throw InvalidInput("data_similarity: no groups");
  const int p = data.front().s.dim();
  Matrix pooled = Matrix::Zero(p, p);
  std::vector<OrthonormalMatrix> u;
  for (const GroupData& g : data) {
    if (g.n < 2) throw InvalidInput("data_similarity: every group needs n >= 2");
    pooled += g.s.matrix() / (g.n - 1);
    u.push_back(sym_eig(g.s).vectors);
  }
  return similarity_stat(sym_eig(SymMatrix(pooled, 1e-6)).vectors, u);
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidInput("empirical_quantile: empty input");
  std::sort(values.begin(), values.end());
  const double h = prob * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

PredictiveSummary predictive_minmax(const std::vector<Vector>& stats, const std::optional<Vector>& observed,
                                    double level) {
  if (stats.empty()) throw InvalidInput("predictive_minmax: no predictive draws");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("predictive_minmax: level must be in (0, 1)");
  PredictiveSummary out;
  for (const Vector& t : stats) {
    if (t.size() == 0) throw InvalidInput("predictive_minmax: empty statistic");
    out.min_draws.push_back(t.minCoeff());
    out.max_draws.push_back(t.maxCoeff());
  }
  const double tail = 0.5 * (1.0 - level);
  out.min_interval = {empirical_quantile(out.min_draws, tail), empirical_quantile(out.min_draws, 1.0 - tail)};
  out.max_interval = {empirical_quantile(out.max_draws, tail), empirical_quantile(out.max_draws, 1.0 - tail)};
  if (observed) {
    out.observed_min = observed->minCoeff();
    out.observed_max = observed->maxCoeff();
    out.covers_min = out.min_interval.contains(*out.observed_min);
    out.covers_max = out.max_interval.contains(*out.observed_max);
  }
  return out;
}

double effective_sample_size(const ScalarTrace& trace) {
  const std::size_t n = trace.size();
  if (n < 10) throw InvalidInput("effective_sample_size: needs at least 10 values");
  double mean = 0.0;
  for (double x : trace) {
    if (!std::isfinite(x)) throw InvalidInput("effective_sample_size: non-finite value");
    mean += x;
  }
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = trace[i] - mean;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 1e-300 * std::max(1.0, mean * mean))) {
    throw InvalidInput("effective_sample_size: zero-variance trace");
  }

  // Sum of paired autocovariances Gamma_m = gamma_2m + gamma_2m+1, stopped
  // at the first non-positive pair and forced non-increasing.
  double pair_sum = 0.0;
  double previous = kInf;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = autocov(2 * m) + autocov(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous);
    pair_sum += pair;
    previous = pair;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum / gamma0, 1e-12);
  const double ess = static_cast<double>(n) / tau;
  return std::min(ess, static_cast<double>(n));
}

double estimator_similarity(const OrthonormalMatrix& u_hat, const OrthonormalMatrix& u_check) {
  if (u_hat.rows() != u_check.rows() || u_hat.cols() != u_check.cols()) {
    throw InvalidInput("estimator_similarity: dimension mismatch");
  }
  double total = 0.0;
  for (int j = 0; j < u_hat.cols(); ++j) {
    const double d = u_check.col(j).dot(u_hat.col(j));
    total += d * d;
  }
  return std::min(1.0, total / u_hat.cols());
}

double logit(double x) {
  if (!(x > 0.0 && x < 1.0)) throw InvalidInput("logit: argument must lie in (0, 1)");
  return std::log(x) - std::log1p(-x);
}

}  // namespace eigenpool
