#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/gamma.hpp>

#include "doctest.h"
#include "eigenpool/diagnostics.hpp"
#include "eigenpool/errors.hpp"
#include "eigenpool/hiermodel.hpp"
#include "stats_util.hpp"

using namespace eigenpool;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SyntheticData synthetic(int groups, int p, int n, std::uint64_t seed, double w = 200.0) {
  SyntheticSpec spec;
  spec.groups = groups;
  spec.dim = p;
  spec.n = {n};
  spec.w = w;
  spec.alpha = Vector::LinSpaced(p, 1.0, 0.0);
  spec.beta = Vector::LinSpaced(p, 1.0, 0.0);
  spec.eigenvalues = {SpectrumDiag(Vector::LinSpaced(p, 2.0 * p, 1.0))};
  spec.seed = seed;
  return generate_synthetic(spec);
}

SamplerContext context(bool mh = false) {
  SamplerSettings s;
  s.mh_correction = mh;
  return SamplerContext(PriorConfig{}, s);
}

bool same_samples(const std::vector<PosteriorSample>& x, const std::vector<PosteriorSample>& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].iteration != y[i].iteration || x[i].w != y[i].w || x[i].alpha != y[i].alpha ||
        x[i].beta != y[i].beta || x[i].v.matrix() != y[i].v.matrix()) {
      return false;
    }
    for (int k = 0; k < x[i].groups(); ++k) {
      if (x[i].u[k].matrix() != y[i].u[k].matrix() || x[i].lambda[k].values() != y[i].lambda[k].values()) {
        return false;
      }
    }
  }
  return true;
}

double chi_square_gamma(const std::vector<double>& draws, double shape, double rate, int bins) {
  const boost::math::gamma_distribution<> g(shape, 1.0 / rate);
  std::vector<int> counts(bins, 0);
  for (double x : draws) {
    const int b = std::min(bins - 1, static_cast<int>(boost::math::cdf(g, x) * bins));
    ++counts[b];
  }
  const double expected = static_cast<double>(draws.size()) / bins;
  double chi = 0.0;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

}  // namespace

TEST_CASE("validate_groups") {
  const SyntheticData d = synthetic(2, 3, 10, 1);
  CHECK_NOTHROW(validate_groups(d.groups));
  CHECK_THROWS_AS(validate_groups({}), InvalidInput);
  std::vector<GroupData> mixed = d.groups;
  mixed.push_back(GroupData{10, SymMatrix::identity(2)});
  CHECK_THROWS_AS(validate_groups(mixed), InvalidInput);
  std::vector<GroupData> small = d.groups;
  small[0].n = 1;
  CHECK_THROWS_AS(validate_groups(small), InvalidInput);
  CHECK_NOTHROW(validate_groups(small, 1));
  Matrix indefinite = Matrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  CHECK_THROWS_AS(validate_groups({GroupData{5, SymMatrix(indefinite)}}), InvalidInput);
}

TEST_CASE("variant names and settings validation") {
  for (ModelVariant v : {ModelVariant::hierarchical, ModelVariant::no_pooling, ModelVariant::one_shared_eigenvector,
                         ModelVariant::common_covariance}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("pooled"), InvalidInput);
  PriorConfig bad;
  bad.tau0_sq = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  SamplerSettings s;
  s.shape_grid = 0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  ChainControls c;
  c.iterations = 10;
  c.burn_in = 10;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c.burn_in = 2;
  c.thin = 3;
  CHECK_FALSE(c.saves(2));
  CHECK_FALSE(c.saves(4));
  CHECK(c.saves(5));
  CHECK(c.saves(8));
}

TEST_CASE("initialize_state uses the empirical eigendecomposition") {
  const SyntheticData d = synthetic(3, 4, 30, 2);
  const ChainState s = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 5);
  for (int k = 0; k < 3; ++k) {
    const EigenDecomposition e = sym_eig(SymMatrix(d.groups[k].s.matrix() / 29.0));
    CHECK((s.u[k].matrix() - e.vectors.matrix()).norm() < 1e-12);
    CHECK((s.lambda[k].values() - e.values.values()).norm() < 1e-12);
  }
  CHECK(s.conc.w == doctest::Approx(1000.0));
  CHECK(s.conc.strictly_ordered());
  const ChainState shared = initialize_state(d.groups, PriorConfig{}, ModelVariant::one_shared_eigenvector, 5);
  CHECK(shared.conc.w == 1000.0);
  CHECK(shared.conc.alpha == vec({1, 0, 0, 0}));
  CHECK(initialize_state(d.groups, PriorConfig{}, ModelVariant::no_pooling, 5).coupling_a().isZero());
}

TEST_CASE("eigenvector update concentrates on the data eigenvectors (p=2, K=1)") {
  // Conditional on Lambda, the target over the rotation angle t of U is
  // exp(-1/2 sum_j u_j^T S u_j / lambda_j); compare with quadrature.
  Matrix s(2, 2);
  s << 2000.0, 0.0, 0.0, 200.0;
  Rng rot(3);
  const Matrix r = haar_orthonormal(2, rot).matrix();
  const Matrix s_rot = r * s * r.transpose();
  const std::vector<GroupData> data{GroupData{201, SymMatrix(s_rot)}};
  ChainState state = initialize_state(data, PriorConfig{}, ModelVariant::no_pooling, 9);
  state.lambda[0] = SpectrumDiag(vec({10.0, 1.0}));
  state.u[0] = OrthonormalMatrix(r.rowwise().reverse());  // start at the wrong axis
  const SamplerContext ctx = context();
  std::vector<double> x;
  for (int i = 0; i < 20000; ++i) {
    update_group_eigenvectors(state, data, ctx);
    x.push_back(std::pow(r.col(0).dot(state.u[0].col(0)), 2));
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double t = 2 * kPi * i / 200000.0;
    const double c2 = std::cos(t) * std::cos(t), s2 = 1.0 - c2;
    // u1 = (cos t, sin t) in the eigenbasis of S; u2 orthogonal.
    const double logd = -0.5 * ((2000.0 * c2 + 200.0 * s2) / 10.0 + (2000.0 * s2 + 200.0 * c2) / 1.0);
    const double wgt = std::exp(logd + 0.5 * (2000.0 / 10.0 + 200.0));
    num += wgt * c2;
    den += wgt;
  }
  const std::vector<double> kept(x.begin() + 1000, x.end());
  CHECK(testutil::mean(kept) > 0.95);
  CHECK(std::abs(testutil::mean(kept) - num / den) < 4.0 * testutil::batch_se(kept, 50) + 1e-4);
}

TEST_CASE("eigenvector update with a flat target is a uniform rotation") {
  const std::vector<GroupData> data{GroupData{10, SymMatrix(3.0 * Matrix::Identity(3, 3))}};
  ChainState state = initialize_state(data, PriorConfig{}, ModelVariant::no_pooling, 4);
  const SamplerContext ctx = context();
  std::vector<double> x;
  for (int i = 0; i < 30000; ++i) {
    update_group_eigenvectors(state, data, ctx);
    CHECK(state.u[0].orthonormality_error() < 1e-8);
    x.push_back(state.u[0](0, 0) * state.u[0](0, 0));
  }
  CHECK(std::abs(testutil::mean(x) - 1.0 / 3.0) < 4.0 * testutil::batch_se(x, 50));
}

TEST_CASE("eigenvalue update") {
  const SamplerContext ctx = context();
  SUBCASE("p=1 matches the untruncated gamma on 1/lambda") {
    const std::vector<GroupData> data{GroupData{5, SymMatrix((Matrix(1, 1) << 3.0).finished())}};
    ChainState state = initialize_state(data, PriorConfig{}, ModelVariant::no_pooling, 2);
    std::vector<double> inv;
    for (int i = 0; i < 40000; ++i) {
      update_group_eigenvalues(state, data, ctx);
      inv.push_back(1.0 / state.lambda[0][0]);
    }
    // (nu0 + n - 1) / (nu0 sigma0^2 + u^T S u) = 6 / 5
    CHECK(std::abs(testutil::mean(inv) - 1.2) < 3.0 * testutil::iid_se(inv));
  }
  SUBCASE("zero scatter gives ordered inverse-gamma(2, 1) draws") {
    // Rejection oracle: sort pairs of independent inverse-gamma(2, 1) draws.
    const std::vector<GroupData> init{GroupData{3, SymMatrix::identity(2)}};
    const std::vector<GroupData> data{GroupData{3, SymMatrix::zeros(2)}};
    ChainState state = initialize_state(init, PriorConfig{}, ModelVariant::no_pooling, 3);
    std::vector<double> top, bottom, top_ref, bottom_ref;
    Rng oracle(99);
    for (int i = 0; i < 100000; ++i) {
      update_group_eigenvalues(state, data, ctx);
      CHECK(state.lambda[0].strictly_decreasing());
      top.push_back(state.lambda[0][0]);
      bottom.push_back(state.lambda[0][1]);
      const double a = 1.0 / oracle.gamma(2.0, 1.0), b = 1.0 / oracle.gamma(2.0, 1.0);
      top_ref.push_back(std::max(a, b));
      bottom_ref.push_back(std::min(a, b));
    }
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      CHECK(empirical_quantile(top, q) == doctest::Approx(empirical_quantile(top_ref, q)).epsilon(0.02));
      CHECK(empirical_quantile(bottom, q) == doctest::Approx(empirical_quantile(bottom_ref, q)).epsilon(0.02));
    }
  }
}

TEST_CASE("update_v") {
  const SyntheticData d = synthetic(3, 3, 20, 6);
  const SamplerContext ctx = context();
  SUBCASE("nearly zero A leaves V uniform") {
    ChainState state = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 7);
    state.conc.w = 1e-12;
    std::vector<double> x;
    for (int i = 0; i < 20000; ++i) {
      update_v(state, ctx);
      x.push_back(state.v(0, 0) * state.v(0, 0));
    }
    CHECK(std::abs(testutil::mean(x) - 1.0 / 3.0) < 4.0 * testutil::batch_se(x, 50));
  }
  SUBCASE("identical U_k and large w pull V to them") {
    ChainState state = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 8);
    Rng rng(1);
    const OrthonormalMatrix star = haar_orthonormal(3, rng);
    for (auto& u : state.u) u = star;
    state.conc = ConcentrationParams(1000.0, vec({1, 0.5, 0}), vec({1, 0.5, 0}));
    double sum = 0.0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
      update_v(state, ctx);
      CHECK(state.v.orthonormality_error() < 1e-8);
      sum += similarity_stat(state.v, {star}).mean();
    }
    CHECK(sum / draws > 0.95);
  }
  SUBCASE("group order does not matter") {
    ChainState a = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 9);
    ChainState b = a;
    std::reverse(b.u.begin(), b.u.end());
    update_v(a, ctx);
    update_v(b, ctx);
    CHECK((a.v.matrix() - b.v.matrix()).norm() < 1e-10);
  }
}

TEST_CASE("compute_m") {
  const SyntheticData d = synthetic(3, 4, 20, 10);
  ChainState state = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 11);
  Rng rng(2);
  Matrix expected = Matrix::Zero(4, 4);
  for (auto& u : state.u) {
    u = haar_orthonormal(4, rng);
    expected += hadamard_square(OrthonormalMatrix(state.v.matrix().transpose() * u.matrix(), 1e-6));
  }
  const Matrix m = compute_m(state);
  CHECK((m - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m.rowwise().sum().array() - 3.0).abs().maxCoeff() < 1e-8);
  CHECK((m.colwise().sum().array() - 3.0).abs().maxCoeff() < 1e-8);
  CHECK(m.minCoeff() >= 0.0);
  for (auto& u : state.u) u = flip_columns(state.v, vec({1, -1, 1, -1}));
  CHECK((compute_m(state) - 3.0 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("update_w") {
  const SyntheticData d = synthetic(2, 2, 20, 12);
  const SamplerContext ctx = context(false);
  const PriorConfig& pr = ctx.priors;
  SUBCASE("groups at the mode leave only the prior rate") {
    ChainState state = initialize_state(d.groups, pr, ModelVariant::hierarchical, 13);
    const Matrix m = 2.0 * Matrix::Identity(2, 2);
    std::vector<double> draws;
    for (int i = 0; i < 50000; ++i) {
      update_w(state, m, ctx);
      draws.push_back(state.conc.w);
    }
    const double shape = pr.eta0 / 2 + 1.0 * 2 / 2, rate = pr.eta0 * pr.tau0_sq / 2;
    CHECK(std::abs(testutil::mean(draws) - shape / rate) < 4.0 * testutil::iid_se(draws));
  }
  SUBCASE("no groups recovers the prior") {
    ChainState state = initialize_state(d.groups, pr, ModelVariant::hierarchical, 14);
    state.u.clear();
    state.lambda.clear();
    const Matrix m = compute_m(state);
    std::vector<double> draws;
    for (int i = 0; i < 50000; ++i) {
      update_w(state, m, ctx);
      draws.push_back(state.conc.w);
    }
    CHECK(std::abs(testutil::mean(draws) - 1.0 / pr.tau0_sq) < 3.0 * testutil::iid_se(draws));
  }
  SUBCASE("chi-square against the gamma full conditional") {
    ChainState state = initialize_state(d.groups, pr, ModelVariant::hierarchical, 15);
    Rng rng(4);
    for (auto& u : state.u) u = haar_orthonormal(2, rng);
    const Matrix m = compute_m(state);
    const Matrix gap = 2.0 * Matrix::Identity(2, 2) - m;
    const double rate = pr.eta0 * pr.tau0_sq / 2 + state.conc.alpha.dot(gap * state.conc.beta);
    const double shape = pr.eta0 / 2 + 1.0;
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) {
      update_w(state, m, ctx);
      draws.push_back(state.conc.w);
    }
    CHECK(chi_square_gamma(draws, shape, rate, 20) < 43.8);  // 0.1% point of chi2(19)
  }
}

TEST_CASE("shape vector updates") {
  const SamplerContext ctx = context();
  SUBCASE("no groups: interior entries are uniform order statistics") {
    const SyntheticData d = synthetic(1, 4, 20, 16);
    ChainState state = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 17);
    state.u.clear();
    state.lambda.clear();
    const Matrix m = compute_m(state);
    std::vector<double> a2, a3, b2;
    for (int i = 0; i < 10000; ++i) {
      update_shape_vectors(state, m, ctx);
      CHECK(state.conc.strictly_ordered());
      CHECK(state.conc.alpha(0) == 1.0);
      CHECK(state.conc.alpha(3) == 0.0);
      a2.push_back(state.conc.alpha(1));
      a3.push_back(state.conc.alpha(2));
      b2.push_back(state.conc.beta(1));
    }
    CHECK(std::abs(testutil::mean(a2) - 2.0 / 3.0) < 4.0 * testutil::batch_se(a2, 50));
    CHECK(std::abs(testutil::mean(a3) - 1.0 / 3.0) < 4.0 * testutil::batch_se(a3, 50));
    CHECK(std::abs(testutil::mean(b2) - 2.0 / 3.0) < 4.0 * testutil::batch_se(b2, 50));
  }
  SUBCASE("p=3 grid draws match a fine-grid inverse CDF") {
    const SyntheticData d = synthetic(2, 3, 20, 18);
    ChainState state = initialize_state(d.groups, PriorConfig{}, ModelVariant::hierarchical, 19);
    Rng rng(5);
    for (auto& u : state.u) u = haar_orthonormal(3, rng);
    state.conc = ConcentrationParams(20.0, vec({1, 0.5, 0}), vec({1, 0.3, 0}));
    const ConcentrationParams fixed = state.conc;
    const Matrix m = compute_m(state);
    const double slope = (2.0 * Matrix::Identity(3, 3) - m).row(1).dot(fixed.beta);
    // Independent oracle: density e^{-w x slope} [x (1 - x)]^{K/2} on (0, 1).
    const int fine = 1000000;
    std::vector<double> cdf(fine);
    double total = 0.0;
    for (int i = 0; i < fine; ++i) {
      const double x = (i + 0.5) / fine;
      total += std::exp(-20.0 * x * slope + std::log(x * (1 - x)) + 20.0 * std::max(0.0, slope));
      cdf[i] = total;
    }
    const auto oracle_quantile = [&](double q) {
      return (std::lower_bound(cdf.begin(), cdf.end(), q * total) - cdf.begin() + 0.5) / fine;
    };
    CHECK(alpha_log_conditional(state, m, 1, 0.3) - alpha_log_conditional(state, m, 1, 0.6) ==
          doctest::Approx(-20.0 * slope * (0.3 - 0.6) + std::log(0.3 * 0.7) - std::log(0.6 * 0.4)));
    std::vector<double> draws;
    for (int i = 0; i < 40000; ++i) {
      state.conc = fixed;
      update_shape_vectors(state, m, ctx);
      draws.push_back(state.conc.alpha(1));
    }
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const double mc = 3.0 * std::sqrt(q * (1 - q) / draws.size()) * 2.0;  // density >= 1/2 near the bulk
      CHECK(std::abs(empirical_quantile(draws, q) - oracle_quantile(q)) < 1.0 / 200 + mc);
    }
  }
}

TEST_CASE("Wishart sampling") {
  Rng rng(20);
  SUBCASE("mean identity") {
    const SymMatrix eye = SymMatrix::identity(3);
    std::vector<std::vector<double>> entries(9);
    for (int i = 0; i < 400; ++i) {
      const Matrix w = sample_wishart(eye, 10000, rng).matrix() / 10000.0;
      for (int e = 0; e < 9; ++e) entries[e].push_back(w(e / 3, e % 3));
    }
    for (int e = 0; e < 9; ++e) {
      const double target = e / 3 == e % 3 ? 1.0 : 0.0;
      CHECK(std::abs(testutil::mean(entries[e]) - target) < 3.5 * testutil::iid_se(entries[e]));
    }
  }
  SUBCASE("p=1 is a scaled chi-square") {
    const SymMatrix s((Matrix(1, 1) << 2.5).finished());
    std::vector<double> x, sq;
    for (int i = 0; i < 40000; ++i) x.push_back(sample_wishart(s, 7, rng)(0, 0) / 2.5);
    CHECK(std::abs(testutil::mean(x) - 7.0) < 4.0 * testutil::iid_se(x));
    CHECK(testutil::variance(x) == doctest::Approx(14.0).epsilon(0.05));
  }
  SUBCASE("affine equivariance") {
    Matrix sigma(3, 3);
    sigma << 4, 1, 0.5, 1, 2, 0.3, 0.5, 0.3, 1;
    const Matrix q = haar_orthonormal(3, rng).matrix();
    std::vector<double> a01, b01, a00, b00;
    for (int i = 0; i < 20000; ++i) {
      const Matrix w1 = sample_wishart(SymMatrix(q * sigma * q.transpose(), 1e-6), 5, rng).matrix();
      const Matrix w2 = q * sample_wishart(SymMatrix(sigma), 5, rng).matrix() * q.transpose();
      a01.push_back(w1(0, 1) * w1(0, 1));
      b01.push_back(w2(0, 1) * w2(0, 1));
      a00.push_back(w1(0, 0));
      b00.push_back(w2(0, 0));
    }
    const auto z = [](const std::vector<double>& x, const std::vector<double>& y) {
      return std::abs(testutil::mean(x) - testutil::mean(y)) /
             std::hypot(testutil::iid_se(x), testutil::iid_se(y));
    };
    CHECK(z(a00, b00) < 4.0);
    CHECK(z(a01, b01) < 4.0);
  }
  SUBCASE("errors and the singular scatter") {
    CHECK_THROWS_AS(sample_wishart(SymMatrix::identity(3), 2, rng), InvalidInput);
    CHECK_THROWS_AS(sample_wishart(SymMatrix::zeros(2), 4, rng), InvalidInput);
    std::vector<double> x;
    for (int i = 0; i < 20000; ++i) x.push_back(sample_scatter(SymMatrix::identity(3), 2, rng)(1, 1));
    CHECK(std::abs(testutil::mean(x) - 2.0) < 4.0 * testutil::iid_se(x));
    CHECK(sample_scatter(SymMatrix::identity(2), 0, rng).matrix().isZero());
  }
}

TEST_CASE("run_chain contracts") {
  const SyntheticData d = synthetic(3, 3, 15, 21);
  ChainControls controls;
  controls.iterations = 60;
  controls.burn_in = 10;
  controls.thin = 5;
  controls.seed = 77;

  SUBCASE("zero iterations emit nothing") {
    ChainControls none;
    CHECK(run_chain_collect(d.groups, PriorConfig{}, ModelVariant::hierarchical, none).empty());
  }
  SUBCASE("thinning and determinism") {
    const auto a = run_chain_collect(d.groups, PriorConfig{}, ModelVariant::hierarchical, controls);
    const auto b = run_chain_collect(d.groups, PriorConfig{}, ModelVariant::hierarchical, controls);
    REQUIRE(a.size() == 10);
    CHECK(a.front().iteration == 15);
    CHECK(a.back().iteration == 60);
    CHECK(same_samples(a, b));
    controls.seed = 78;
    CHECK_FALSE(same_samples(a, run_chain_collect(d.groups, PriorConfig{}, ModelVariant::hierarchical, controls)));
  }
  SUBCASE("state invariants every iteration") {
    controls.iterations = 300;
    run_chain(d.groups, PriorConfig{}, ModelVariant::hierarchical, controls, {}, [&](long, const ChainState& s) {
      CHECK(s.v.orthonormality_error() < 1e-8);
      for (int k = 0; k < s.groups(); ++k) {
        CHECK(s.u[k].orthonormality_error() < 1e-8);
        CHECK(s.lambda[k].strictly_decreasing());
      }
      CHECK(s.conc.strictly_ordered());
      CHECK(s.conc.w > 0.0);
      const Matrix m = compute_m(s);
      CHECK((m.rowwise().sum().array() - 3.0).abs().maxCoeff() < 1e-8);
    });
  }
  SUBCASE("no pooling ignores the other groups") {
    const SyntheticData other = synthetic(3, 3, 40, 22);
    std::vector<GroupData> swapped = d.groups;
    swapped[1] = other.groups[1];
    swapped[2] = other.groups[2];
    const auto a = run_chain_collect(d.groups, PriorConfig{}, ModelVariant::no_pooling, controls);
    const auto b = run_chain_collect(swapped, PriorConfig{}, ModelVariant::no_pooling, controls);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].u[0].matrix() == b[i].u[0].matrix());
      CHECK(a[i].lambda[0].values() == b[i].lambda[0].values());
    }
  }
  SUBCASE("no pooling with one group is the within-group chain alone") {
    const std::vector<GroupData> one{d.groups[0]};
    ChainControls every = controls;
    every.burn_in = 0;
    every.thin = 1;
    const auto chain = run_chain_collect(one, PriorConfig{}, ModelVariant::no_pooling, every);
    ChainState state = initialize_state(one, PriorConfig{}, ModelVariant::no_pooling, every.seed);
    const SamplerContext ctx(PriorConfig{}, every.settings);
    for (const PosteriorSample& s : chain) {
      update_group_eigenvectors(state, one, ctx);
      update_group_eigenvalues(state, one, ctx);
      CHECK(s.u[0].matrix() == state.u[0].matrix());
      CHECK(s.lambda[0].values() == state.lambda[0].values());
    }
  }
  SUBCASE("restricted variants keep their fixed parameters") {
    for (const auto& s : run_chain_collect(d.groups, PriorConfig{}, ModelVariant::one_shared_eigenvector, controls)) {
      CHECK(s.w == 1000.0);
      CHECK(s.alpha == vec({1, 0, 0}));
    }
    for (const auto& s : run_chain_collect(d.groups, PriorConfig{}, ModelVariant::common_covariance, controls)) {
      CHECK(s.u[0].matrix() == s.u[2].matrix());
      CHECK(s.lambda[1].values() == s.lambda[2].values());
    }
  }
  SUBCASE("bad input") {
    std::vector<GroupData> bad = d.groups;
    bad[0].s = SymMatrix::identity(2);
    CHECK_THROWS_AS(run_chain_collect(bad, PriorConfig{}, ModelVariant::hierarchical, controls), InvalidInput);
  }
}

TEST_CASE("posterior predictive groups") {
  const SyntheticData d = synthetic(3, 3, 10000, 23);
  Rng rng(24);
  PosteriorSample sample;
  sample.variant = ModelVariant::hierarchical;
  sample.v = haar_orthonormal(3, rng);
  sample.u.assign(3, sample.v);
  sample.lambda.assign(3, SpectrumDiag(vec({10, 5, 1})));
  sample.w = 1e5;
  sample.alpha = vec({1, 0.5, 0});
  sample.beta = vec({1, 0.5, 0});
  SUBCASE("strong concentration reproduces V") {
    const auto sim = posterior_predictive_groups(sample, d.groups, rng);
    REQUIRE(sim.size() == 3);
    std::vector<OrthonormalMatrix> eig;
    for (const auto& g : sim) {
      CHECK(g.n == 10000);
      eig.push_back(sym_eig(g.s).vectors);
    }
    CHECK(similarity_stat(sample.v, eig).minCoeff() > 0.95);
  }
  SUBCASE("no pooling draws Haar eigenvectors") {
    sample.variant = ModelVariant::no_pooling;
    double sum = 0.0;
    const int reps = 300;
    std::vector<double> x;
    for (int r = 0; r < reps; ++r) {
      std::vector<OrthonormalMatrix> eig;
      for (const auto& g : posterior_predictive_groups(sample, d.groups, rng)) eig.push_back(sym_eig(g.s).vectors);
      x.push_back(similarity_stat(sample.v, eig).mean());
      sum += x.back();
    }
    CHECK(std::abs(sum / reps - 1.0 / 3.0) < 4.0 * testutil::iid_se(x));
  }
  SUBCASE("group count mismatch") {
    const std::vector<GroupData> two(d.groups.begin(), d.groups.begin() + 2);
    CHECK_THROWS_AS(posterior_predictive_groups(sample, two, rng), InvalidInput);
  }
}

TEST_CASE("posterior summaries") {
  PosteriorSample s;
  s.variant = ModelVariant::hierarchical;
  s.v = OrthonormalMatrix::identity(2);
  s.u = {OrthonormalMatrix::identity(2)};
  s.lambda = {SpectrumDiag(vec({4, 1}))};
  s.w = 4.0;
  s.alpha = vec({1, 0});
  s.beta = vec({1, 0});
  PosteriorSample t = s;
  t.lambda = {SpectrumDiag(vec({2, 1}))};
  CHECK(posterior_mean_sigma({s, t}, 0).isApprox((Matrix(2, 2) << 3, 0, 0, 1).finished()));
  CHECK(point_estimate_v({s, t}).matrix().cwiseAbs().isApprox(Matrix::Identity(2, 2)));
  CHECK_THROWS_AS(point_estimate_v({}), InvalidInput);
}

TEST_CASE("generate_synthetic") {
  SUBCASE("w=0 gives Haar eigenvectors") {
    SyntheticSpec spec;
    spec.groups = 3000;
    spec.dim = 3;
    spec.n = {5};
    spec.eigenvalues = {SpectrumDiag(vec({3, 2, 1}))};
    const SyntheticData d = generate_synthetic(spec);
    std::vector<double> x;
    for (const auto& u : d.truth.u) x.push_back(u(0, 0) * u(0, 0));
    CHECK(std::abs(testutil::mean(x) - 1.0 / 3.0) < 4.0 * testutil::iid_se(x));
  }
  SUBCASE("large n recovers the eigenvalues") {
    SyntheticSpec spec;
    spec.dim = 3;
    spec.n = {100000};
    spec.w = 300.0;
    spec.alpha = vec({1, 0.5, 0});
    spec.beta = vec({1, 0.5, 0});
    spec.eigenvalues = {SpectrumDiag(vec({6, 3, 1}))};
    spec.raw_observations = true;
    const SyntheticData d = generate_synthetic(spec);
    const Vector e = sym_eig(SymMatrix(d.groups[0].s.matrix() / 99999.0)).values.values();
    CHECK(((e - vec({6, 3, 1})).array() / vec({6, 3, 1}).array()).abs().maxCoeff() < 0.02);
    CHECK(d.observations.size() == 1);
    CHECK((centered_scatter(d.observations[0]).matrix() - d.groups[0].s.matrix()).norm() < 1e-6);
  }
  SUBCASE("fixed seed reproduces the truth") {
    const SyntheticData a = synthetic(2, 3, 10, 31), b = synthetic(2, 3, 10, 31);
    CHECK(a.truth.v.matrix() == b.truth.v.matrix());
    CHECK(a.truth.u[1].matrix() == b.truth.u[1].matrix());
    CHECK(a.groups[1].s.matrix() == b.groups[1].s.matrix());
  }
  SUBCASE("bad specs") {
    SyntheticSpec spec;
    spec.dim = 2;
    spec.n = {5};
    spec.eigenvalues = {SpectrumDiag(vec({1, 0}))};
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidInput);
    spec.eigenvalues = {SpectrumDiag(vec({2, 1}))};
    spec.n = {5, 6};
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidInput);
  }
}
