#include "cdro/errors.hpp"
#include "cdro/transport.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace cdro;

namespace {

/** 1-D order-1 distance as the integral of |F - G| */
double w1_line(const vector_t& x, const vector_t& wx, const vector_t& y, const vector_t& wy) {
  std::vector<double> pts(x.data(), x.data() + x.size());
  pts.insert(pts.end(), y.data(), y.data() + y.size());
  std::sort(pts.begin(), pts.end());
  auto cdf = [](const vector_t& p, const vector_t& w, double t) {
    double s = 0;
    for (index_t i = 0; i < p.size(); ++i)
      if (p(i) <= t) s += w(i);
    return s;
  };
  double total = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    total += std::fabs(cdf(x, wx, pts[k]) - cdf(y, wy, pts[k])) * (pts[k + 1] - pts[k]);
  return total;
}

/** Worst linear expectation over the order-1 ball with the 1-norm and a box: greedy on |a_k| */
double greedy_linear_worst_case(const vector_t& a, double b, const UncertaintyDataset& ds, const SupportPolytope& sp,
                                double theta) {
  const index_t n = ds.sample_count();
  double value = b + (ds.deviations * a).mean();
  std::vector<index_t> order(static_cast<std::size_t>(a.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](index_t l, index_t r) { return std::fabs(a(l)) > std::fabs(a(r)); });
  double budget = theta;
  for (index_t k : order) {
    if (a(k) == 0.0) break;
    double room = 0;
    for (index_t i = 0; i < n; ++i)
      room += (a(k) > 0 ? sp.xi_max(k) - ds.deviations(i, k) : ds.deviations(i, k) - sp.xi_min(k));
    room /= static_cast<double>(n);
    const double used = std::min(room, budget);
    value += std::fabs(a(k)) * used;
    budget -= used;
  }
  return value;
}

}  // namespace

TEST_CASE("distance of a distribution to itself is zero") {
  auto d = DiscreteDistribution::empirical((matrix_t(3, 2) << 0, 1, 2, 3, 4, 5).finished());
  CHECK(wasserstein_distance(d, d, GroundNorm::one_norm, test::simplex()).cost == doctest::Approx(0).scale(1));
}

TEST_CASE("two point masses") {
  DiscreteDistribution p{(matrix_t(1, 2) << 0.0, 0.0).finished(), vector_t::Ones(1)};
  DiscreteDistribution q{(matrix_t(1, 2) << 0.3, -0.4).finished(), vector_t::Ones(1)};
  CHECK(wasserstein_distance(p, q, GroundNorm::one_norm, test::simplex()).cost == doctest::Approx(0.7));
  CHECK(wasserstein_distance(p, q, GroundNorm::inf_norm, test::simplex()).cost == doctest::Approx(0.4));
}

TEST_CASE("1-D distance matches the CDF integral") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 40; ++rep) {
    const int m = 2 + rep % 5, n = 1 + rep % 4;
    vector_t x(m), y(n), wx(m), wy(n);
    for (int i = 0; i < m; ++i) x(i) = u(rng), wx(i) = u(rng) + 0.1;
    for (int i = 0; i < n; ++i) y(i) = u(rng), wy(i) = u(rng) + 0.1;
    wx /= wx.sum();
    wy /= wy.sum();
    DiscreteDistribution p{x, wx}, q{y, wy};
    const auto plan = wasserstein_distance(p, q, GroundNorm::one_norm, test::simplex());
    CHECK(plan.cost == doctest::Approx(w1_line(x, wx, y, wy)).epsilon(1e-9));
    CHECK(plan.flow.rowwise().sum().isApprox(wx, 1e-9));
    CHECK(plan.flow.colwise().sum().transpose().isApprox(wy, 1e-9));
  }
}

TEST_CASE("metric-ball oracle at radius zero is the sample average") {
  std::mt19937_64 rng(2);
  auto ds = test::random_dataset(rng, 4, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  const vector_t a = (vector_t(2) << 1.5, -0.7).finished();
  AmbiguitySpec spec;
  spec.theta1 = 0.0;
  auto r = oracle_worst_case_expectation(a, 0.2, ds, sp, spec, {}, test::simplex());
  REQUIRE(r.feasible());
  CHECK(r.value == doctest::Approx(0.2 + (ds.deviations * a).mean()).epsilon(1e-9));
}

TEST_CASE("metric-ball oracle matches the greedy closed form for linear losses") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int rep = 0; rep < 20; ++rep) {
    auto ds = test::random_dataset(rng, 2 + rep % 4, 1 + rep % 2);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    vector_t a(ds.dim());
    for (index_t k = 0; k < a.size(); ++k) a(k) = u(rng);
    AmbiguitySpec spec;
    spec.theta1 = 0.05 * (rep % 7);
    auto r = oracle_worst_case_expectation(a, 0.0, ds, sp, spec, {}, test::simplex());
    REQUIRE(r.feasible());
    CHECK(r.value == doctest::Approx(greedy_linear_worst_case(a, 0.0, ds, sp, spec.theta1)).epsilon(1e-8));
  }
}

TEST_CASE("worst-case distribution stays inside the ball") {
  std::mt19937_64 rng(8);
  auto ds = test::random_dataset(rng, 3, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec spec;
  spec.theta1 = 0.1;
  auto r = oracle_worst_case_expectation((vector_t(2) << 1, 1).finished(), 0, ds, sp, spec, {}, test::simplex());
  REQUIRE(r.feasible());
  auto emp = DiscreteDistribution::empirical(ds.deviations);
  CHECK(wasserstein_distance(r.worst_case, emp, GroundNorm::one_norm, test::simplex()).cost <= 0.1 + 1e-8);
}

TEST_CASE("shared coupling is never above separate couplings") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 12; ++rep) {
    auto ds = test::random_dataset(rng, 3, 2);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    const vector_t a = (vector_t(2) << u(rng), u(rng)).finished();
    AmbiguitySpec spec;
    spec.theta1 = 0.05 + 0.05 * (rep % 3);
    spec.theta2 = 0.02 + 0.1 * (rep % 4);
    OracleOptions shared, separate;
    shared.grid_points_per_dim = separate.grid_points_per_dim = 6;
    separate.coupling = CouplingMode::separate;
    auto s = oracle_worst_case_expectation(a, 0, ds, sp, spec, shared, test::highs());
    auto p = oracle_worst_case_expectation(a, 0, ds, sp, spec, separate, test::highs());
    REQUIRE(s.feasible());
    REQUIRE(p.feasible());
    CHECK(s.value <= p.value + 1e-7);
  }
}

TEST_CASE("copula budget can only shrink the worst case") {
  std::mt19937_64 rng(21);
  auto ds = test::random_dataset(rng, 4, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  const vector_t a = (vector_t(2) << 1.0, 0.8).finished();
  AmbiguitySpec m1;
  m1.theta1 = 0.1;
  AmbiguitySpec m2 = m1;
  m2.theta2 = 0.05;
  OracleOptions o;
  o.grid_points_per_dim = 6;
  auto v1 = oracle_worst_case_expectation(a, 0, ds, sp, m1, o, test::highs());
  auto v2 = oracle_worst_case_expectation(a, 0, ds, sp, m2, o, test::highs());
  CHECK(v2.value <= v1.value + 1e-9);
}

TEST_CASE("desk scale is enforced") {
  std::mt19937_64 rng(1);
  auto ds = test::random_dataset(rng, 6, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec spec;
  spec.theta1 = 0.1;
  CHECK_THROWS(oracle_worst_case_expectation(vector_t::Ones(2), 0, ds, sp, spec, {}, test::simplex()));
}

TEST_CASE("Diracs and a two-point example") {
  DiscreteDistribution p{(matrix_t(1, 1) << 0.0).finished(), vector_t::Ones(1)};
  DiscreteDistribution q{(matrix_t(1, 1) << 1.0).finished(), vector_t::Ones(1)};
  CHECK(wasserstein_distance(p, q, GroundNorm::one_norm, test::simplex()).cost == doctest::Approx(1));
  auto two = DiscreteDistribution::empirical((matrix_t(2, 1) << 0.0, 1.0).finished());
  auto half = DiscreteDistribution::empirical((matrix_t(2, 1) << 0.5, 0.5).finished());
  CHECK(wasserstein_distance(two, half, GroundNorm::one_norm, test::simplex()).cost == doctest::Approx(0.5));
}

TEST_CASE("symmetry and triangle inequality") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0, 1);
  auto draw = [&](int m) {
    matrix_t pts(m, 2);
    vector_t w(m);
    for (int i = 0; i < m; ++i) pts(i, 0) = u(rng), pts(i, 1) = u(rng), w(i) = u(rng) + 0.05;
    return DiscreteDistribution{pts, w / w.sum()};
  };
  for (int rep = 0; rep < 20; ++rep) {
    auto p = draw(3), q = draw(4), r = draw(2);
    for (auto norm : {GroundNorm::one_norm, GroundNorm::inf_norm}) {
      const double pq = wasserstein_distance(p, q, norm, test::simplex()).cost;
      const double qp = wasserstein_distance(q, p, norm, test::simplex()).cost;
      const double pr = wasserstein_distance(p, r, norm, test::simplex()).cost;
      const double rq = wasserstein_distance(r, q, norm, test::simplex()).cost;
      CHECK(std::fabs(pq - qp) <= 1e-7);
      CHECK(pq <= pr + rq + 1e-7);
    }
  }
}

TEST_CASE("oracle spec cases") {
  const auto ds = test::dataset_from((matrix_t(2, 1) << -0.2, 0.1).finished());
  const auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec spec;
  spec.theta1 = 0.1;
  auto r = oracle_worst_case_expectation(vector_t::Ones(1), 0.0, ds, sp, spec, {}, test::simplex());
  CHECK(r.value == doctest::Approx(-0.05 + 0.1));
  auto z = oracle_worst_case_expectation(vector_t::Zero(1), 0.7, ds, sp, spec, {}, test::simplex());
  CHECK(z.value == doctest::Approx(0.7));
  AmbiguitySpec big;
  big.theta1 = 0.0;
  big.theta2 = 5.0;
  auto avg = oracle_worst_case_expectation(vector_t::Ones(1), 0.1, ds, sp, big, {}, test::simplex());
  CHECK(avg.value == doctest::Approx(0.05));
}

TEST_CASE("oracle is nondecreasing in both radii") {
  std::mt19937_64 rng(41);
  auto ds = test::random_dataset(rng, 3, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  const vector_t a = (vector_t(2) << 0.8, 1.2).finished();
  OracleOptions o;
  o.grid_points_per_dim = 6;
  double prev = -kInf;
  for (double t1 : {0.0, 0.02, 0.05, 0.1, 0.2}) {
    AmbiguitySpec s;
    s.theta1 = t1;
    s.theta2 = 0.05;
    const double v = oracle_worst_case_expectation(a, 0, ds, sp, s, o, test::highs()).value;
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
  prev = -kInf;
  for (double t2 : {0.0, 0.02, 0.05, 0.1, 0.5}) {
    AmbiguitySpec s;
    s.theta1 = 0.1;
    s.theta2 = t2;
    const double v = oracle_worst_case_expectation(a, 0, ds, sp, s, o, test::highs()).value;
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}

TEST_CASE("max-of-pieces oracle reduces to the affine one") {
  std::mt19937_64 rng(6);
  auto ds = test::random_dataset(rng, 3, 1);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec spec;
  spec.theta1 = 0.05;
  const vector_t a = vector_t::Constant(1, 1.3);
  auto one = oracle_worst_case_expectation(a, 0.2, ds, sp, spec, {}, test::simplex());
  auto dup = oracle_worst_case_expectation({{a, 0.2}, {a, 0.1}}, ds, sp, spec, {}, test::simplex());
  CHECK(dup.value == doctest::Approx(one.value));
}
