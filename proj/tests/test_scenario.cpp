#include "cdro/errors.hpp"
#include "cdro/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace cdro;

TEST_CASE("beta(2,2) quantile inverts 3u^2 - 2u^3") {
  const auto m = Marginal::beta(2, 2);
  for (double u : {0.0, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0}) {
    const double q = m.quantile(u);
    CHECK(3 * q * q - 2 * q * q * q == doctest::Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("truncated Gaussian quantile stays in the unit interval and is monotone") {
  const auto m = Marginal::truncated_gaussian(0.4, 0.3);
  double prev = -1;
  for (double u = 0; u <= 1.0; u += 0.05) {
    const double q = m.quantile(u);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(q >= prev);
    prev = q;
  }
  CHECK(m.quantile(0.0) == doctest::Approx(0.0).scale(1));
  CHECK(m.quantile(1.0) == doctest::Approx(1.0));
}

TEST_CASE("marginal strings") {
  CHECK(parse_marginal("beta(2,5)").p2 == 5.0);
  CHECK(parse_marginal("truncated_gaussian(0.5,0.2)").family == Marginal::Family::truncated_gaussian);
  CHECK_THROWS(parse_marginal("gamma(1,1)"));
  CHECK(parse_marginal(Marginal::beta(2, 2).describe()).p1 == 2.0);
}

TEST_CASE("correlation matrices are validated") {
  CHECK_NOTHROW(validate_correlation(equicorrelation(3, 0.5)));
  CHECK_THROWS(validate_correlation(equicorrelation(3, -0.9)));  // not PSD
  matrix_t bad = equicorrelation(2, 0.5);
  bad(0, 0) = 2;
  CHECK_THROWS(validate_correlation(bad));
  CHECK_THROWS_AS(validate_correlation(matrix_t::Identity(2, 3)), DimensionError);
}

TEST_CASE("sampler is reproducible and seed-sensitive") {
  GeneratorSpec g{equicorrelation(2, 0.5), Marginal::beta(2, 2), 200, 7, {}};
  auto a = sample_gaussian_copula(g), b = sample_gaussian_copula(g);
  CHECK(a.deviations == b.deviations);
  g.seed = 8;
  CHECK(sample_gaussian_copula(g).deviations != a.deviations);
}

TEST_CASE("samples respect the support and center on the forecast") {
  GeneratorSpec g{equicorrelation(3, 0.5), Marginal::beta(2, 2), 2000, 3, (vector_t(3) << 100, 200, 300).finished()};
  auto ds = sample_gaussian_copula(g);
  CHECK(ds.sample_count() == 2000);
  CHECK(ds.capacities(2) == 300);
  for (index_t k = 0; k < 3; ++k) {
    CHECK(std::fabs(ds.deviations.col(k).mean()) <= 1e-12);
    CHECK(ds.deviations.col(k).minCoeff() >= -ds.forecast(k) - 1e-12);
    CHECK(ds.deviations.col(k).maxCoeff() <= 1.0 - ds.forecast(k) + 1e-12);
    CHECK(ds.forecast(k) == doctest::Approx(0.5).epsilon(0.03));  // beta(2,2) mean
  }
}

TEST_CASE("rank correlation follows the Gaussian copula") {
  const double rho = 0.5;
  GeneratorSpec g{equicorrelation(2, rho), Marginal::beta(2, 2), 20000, 11, {}};
  auto ds = sample_gaussian_copula(g);
  const double expect = 6.0 / std::numbers::pi * std::asin(rho / 2);
  CHECK(spearman(ds.deviations.col(0), ds.deviations.col(1)) == doctest::Approx(expect).epsilon(0.03));
}

TEST_CASE("pearson and spearman on small vectors") {
  const vector_t x = (vector_t(4) << 1, 2, 3, 4).finished();
  const vector_t y = (vector_t(4) << 1, 4, 9, 16).finished();
  CHECK(spearman(x, y) == doctest::Approx(1));
  CHECK(pearson(x, -x) == doctest::Approx(-1));
  const vector_t t = (vector_t(4) << 1, 1, 2, 2).finished();
  // average ranks 1.5,1.5,3.5,3.5 against 1..4
  CHECK(spearman(x, t) == doctest::Approx(2.0 / std::sqrt(5.0)));
}

TEST_CASE("split is a seeded partition") {
  GeneratorSpec g{equicorrelation(2, 0.5), Marginal::beta(2, 2), 50, 1, {}};
  auto ds = sample_gaussian_copula(g);
  auto [in, out] = split_dataset(ds, 20, 4);
  CHECK(in.sample_count() == 20);
  CHECK(out.sample_count() == 30);
  CHECK(in.forecast == ds.forecast);
  std::set<double> seen;
  for (index_t i = 0; i < 20; ++i) seen.insert(in.deviations(i, 0));
  for (index_t i = 0; i < 30; ++i) seen.insert(out.deviations(i, 0));
  CHECK(seen.size() == 50);
  auto again = split_dataset(ds, 20, 4);
  CHECK(again.first.deviations == in.deviations);
  CHECK(split_dataset(ds, 20, 5).first.deviations != in.deviations);
  CHECK_THROWS(split_dataset(ds, 51, 1));
}

TEST_CASE("independent copula gives near-zero correlation of pseudo observations") {
  GeneratorSpec g{equicorrelation(2, 0.0), Marginal::beta(2, 2), 1000, 5, {}};
  auto ds = sample_gaussian_copula(g);
  const double r = pearson(ds.deviations.col(0), ds.deviations.col(1));
  CHECK(r > -0.15);
  CHECK(r < 0.15);
}

TEST_CASE("strong dependence shows in the ranks") {
  GeneratorSpec g{equicorrelation(2, 0.9), Marginal::beta(2, 2), 1000, 5, {}};
  auto ds = sample_gaussian_copula(g);
  CHECK(spearman(ds.deviations.col(0), ds.deviations.col(1)) > 0.7);
}

TEST_CASE("split sizes and reassembly") {
  GeneratorSpec g{equicorrelation(2, 0.5), Marginal::beta(2, 2), 1000, 2, {}};
  auto ds = sample_gaussian_copula(g);
  auto [in, out] = split_dataset(ds, 30, 1);
  CHECK(in.sample_count() == 30);
  CHECK(out.sample_count() == 970);
  auto rows = [](const matrix_t& m) {
    std::vector<std::vector<double>> r;
    for (index_t i = 0; i < m.rows(); ++i) r.push_back({m(i, 0), m(i, 1)});
    return r;
  };
  auto all = rows(in.deviations);
  auto rest = rows(out.deviations);
  all.insert(all.end(), rest.begin(), rest.end());
  auto orig = rows(ds.deviations);
  std::sort(all.begin(), all.end());
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);
  CHECK(split_dataset(ds, 999, 1).second.sample_count() == 1);
}
