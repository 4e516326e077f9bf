#include "eigenpool/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "eigenpool/errors.hpp"

namespace eigenpool {

namespace {

using IgnoreErrors = boost::math::policies::policy<
    boost::math::policies::domain_error<boost::math::policies::ignore_error>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;

constexpr int kMaxAttempts = 100;

// Lower standard tail (a, b) with b <= -8: sample -x from the right tail.
double normal_far_tail(Rng& rng, double a, double b) {
  // right-tail bounds
  const double lo = -b;
  const double hi = -a;
  const double alpha = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  const bool uniform_proposal = std::isfinite(hi) && alpha * (hi - lo) < 1.0;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double z;
    double log_accept;
    if (uniform_proposal) {
      z = lo + (hi - lo) * rng.uniform();
      log_accept = -0.5 * (z * z - lo * lo);
    } else {
      z = lo - std::log(rng.uniform()) / alpha;
      if (z >= hi) continue;
      log_accept = -0.5 * (z - alpha) * (z - alpha);
    }
    if (std::log(rng.uniform()) <= log_accept) return -z;
  }
  throw NumericalFailure("truncated normal tail sampler failed to accept");
}

// Draws a standard normal restricted to (a, b) assuming a + b <= 0, so the
// bulk of the interval sits in the lower tail where Phi is accurate.
double standard_truncated_lower(Rng& rng, double a, double b) {
  if (b < -8.0) return normal_far_tail(rng, a, b);
  const double pa = normal_cdf(a);
  const double pb = normal_cdf(b);
  if (!(pb > pa)) {
    // Interval narrower than the CDF resolution; the density is flat on it.
    return a + (b - a) * rng.uniform();
  }
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const double x = normal_quantile(pa + (pb - pa) * rng.uniform());
    if (x > a && x < b) return x;
  }
  return a + (b - a) * rng.uniform();
}

// Standardized gamma(shape, 1) on (lo, hi) by a log-linear grid.
double gamma_grid(Rng& rng, double shape, double lo, double hi) {
  if (!std::isfinite(hi)) {
    const double slope = std::abs((shape - 1.0) / lo - 1.0);
    hi = lo + 50.0 / std::max(slope, 1e-12);
  }
  constexpr int kCells = 512;
  const double width = (hi - lo) / kCells;
  std::vector<double> logf(kCells);
  double top = -kInf;
  for (int i = 0; i < kCells; ++i) {
    const double t = lo + (i + 0.5) * width;
    logf[i] = (shape - 1.0) * std::log(t) - t;
    top = std::max(top, logf[i]);
  }
  std::vector<double> cum(kCells);
  double total = 0.0;
  for (int i = 0; i < kCells; ++i) {
    total += std::exp(logf[i] - top);
    cum[i] = total;
  }
  const double target = rng.uniform() * total;
  const auto cell = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
  return lo + (std::min(cell, kCells - 1) + rng.uniform()) * width;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
  // 53 random bits, shifted half a step away from zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_) / rate;
}

double Rng::chi_squared(double df) { return 2.0 * gamma(0.5 * df, 1.0); }

bool Rng::coin() { return (engine_() >> 63) != 0; }

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::string Rng::state() const {
  std::ostringstream out;
  out << engine_ << ' ' << normal_;
  return out.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream in(state);
  in >> engine_ >> normal_;
  if (!in) throw InvalidInput("corrupt RNG state");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p, IgnoreErrors());
}

double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi) {
  if (!(lo < hi)) throw NumericalFailure("truncated normal: empty interval");
  if (!(sd > 0.0)) throw InvalidInput("truncated normal: sd must be positive");
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double x;
  if (std::isinf(a) && std::isinf(b)) {
    x = rng.normal();
  } else if (a + b > 0.0) {
    x = -standard_truncated_lower(rng, -b, -a);
  } else {
    x = standard_truncated_lower(rng, a, b);
  }
  double value = mean + sd * x;
  // Rounding may land on a bound; nudge strictly inside.
  if (value <= lo) value = std::nextafter(lo, hi);
  if (value >= hi) value = std::nextafter(hi, lo);
  return value;
}

double truncated_gamma(Rng& rng, double shape, double rate, double lo, double hi) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidInput("truncated gamma: shape and rate must be positive");
  if (!(lo >= 0.0) || !(lo < hi)) throw NumericalFailure("truncated gamma: empty interval");
  if (lo == 0.0 && std::isinf(hi)) return rng.gamma(shape, rate);

  const double t_lo = lo * rate;
  const double t_hi = hi * rate;
  const IgnoreErrors pol;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const double p_lo = boost::math::gamma_p(shape, t_lo, pol);
    double t;
    if (p_lo < 0.5) {
      const double p_hi = std::isinf(t_hi) ? 1.0 : boost::math::gamma_p(shape, t_hi, pol);
      if (!(p_hi - p_lo > 1e-300 && p_hi - p_lo > 1e-14 * p_hi)) {
        t = gamma_grid(rng, shape, t_lo, t_hi);
      } else {
        t = boost::math::gamma_p_inv(shape, p_lo + (p_hi - p_lo) * rng.uniform(), pol);
      }
    } else {
      const double q_lo = boost::math::gamma_q(shape, t_lo, pol);
      const double q_hi = std::isinf(t_hi) ? 0.0 : boost::math::gamma_q(shape, t_hi, pol);
      if (!(q_lo - q_hi > 1e-300 && q_lo - q_hi > 1e-14 * q_lo)) {
        t = gamma_grid(rng, shape, t_lo, t_hi);
      } else {
        t = boost::math::gamma_q_inv(shape, q_hi + (q_lo - q_hi) * rng.uniform(), pol);
      }
    }
    const double x = t / rate;
    if (std::isfinite(x) && x > lo && x < hi) return x;
  }
  throw NumericalFailure("truncated gamma: failed to draw inside the interval after 100 attempts");
}

}  // namespace eigenpool
