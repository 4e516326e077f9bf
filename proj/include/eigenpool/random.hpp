#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace eigenpool {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Seed for stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Random source carried explicitly through every sampler.
///
/// Wraps a 64-bit Mersenne twister together with the cached state of the
/// normal generator, so that `state()`/`restore()` capture everything needed
/// to resume a chain bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ULL);

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate);
  double chi_squared(double df);
  bool coin();
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

  std::string state() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_ && a.normal_ == b.normal_;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x);
double normal_quantile(double p);

// Normal(mean, sd) restricted to (lo, hi); either bound may be infinite.
// Inverse-CDF on the tail nearer the bulk, exponential rejection beyond 8 sd.
double truncated_normal(Rng& rng, double mean, double sd, double lo, double hi);

// Gamma(shape, rate) restricted to (lo, hi), 0 <= lo < hi <= inf. Inverse
// CDF through the regularized incomplete gamma function, falling back to a
// log-space grid when the interval mass underflows.
double truncated_gamma(Rng& rng, double shape, double rate, double lo, double hi);

}  // namespace eigenpool
