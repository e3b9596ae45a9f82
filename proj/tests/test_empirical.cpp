#include "cdro/empirical.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace cdro;

TEST_CASE("empirical CDF counts ties as below") {
  const vector_t s = (vector_t(4) << 0.1, -0.2, 0.1, 0.3).finished();
  CHECK(empirical_cdf_value(s, -0.3) == 0.0);
  CHECK(empirical_cdf_value(s, -0.2) == 0.25);
  CHECK(empirical_cdf_value(s, 0.1) == 0.75);
  CHECK(empirical_cdf_value(s, 0.29) == 0.75);
  CHECK(empirical_cdf_value(s, 1.0) == 1.0);
  CHECK_THROWS(empirical_cdf_value(vector_t(0), 0.0));
}

TEST_CASE("pseudo observations are ranks over N") {
  const matrix_t d = (matrix_t(3, 2) << 0.3, -0.1, -0.2, 0.2, 0.1, 0.0).finished();
  const matrix_t p = copula_pseudo_observations(d);
  const matrix_t expect = (matrix_t(3, 2) << 1.0, 1.0 / 3, 1.0 / 3, 1.0, 2.0 / 3, 2.0 / 3).finished();
  CHECK((p - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("cdf images reject column mismatches") {
  CHECK_THROWS_AS(cdf_images(matrix_t::Zero(2, 2), matrix_t::Zero(3, 1)), DimensionError);
}

TEST_CASE("LP certificate equals the indicator count") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_int_distribution<int> n_of(1, 12);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = n_of(rng);
    vector_t s(n);
    for (int i = 0; i < n; ++i) s(i) = u(rng);
    // half of the probes hit a sample exactly
    const double eta = rep % 2 ? s(rep % n) : u(rng);
    const auto cert = cdf_lp_certificate(s, eta, test::simplex());
    CHECK(std::fabs(cert.value - empirical_cdf_value(s, eta)) <= 1e-7);
    for (int i = 0; i < n; ++i) CHECK(cert.z(i) == doctest::Approx(s(i) <= eta ? 1.0 : 0.0));
  }
}

TEST_CASE("eight sorted samples, probe between the third and fourth") {
  const vector_t s = (vector_t(8) << -0.4, -0.3, -0.1, 0.0, 0.05, 0.2, 0.3, 0.45).finished();
  CHECK(empirical_cdf_value(s, -0.05) == 3.0 / 8);
  const auto cert = cdf_lp_certificate(s, -0.05, test::simplex());
  CHECK(cert.value == doctest::Approx(3.0 / 8));
}

TEST_CASE("certificate extremes") {
  const vector_t s = (vector_t(3) << 0.1, 0.2, 0.3).finished();
  auto lo = cdf_lp_certificate(s, 0.0, test::simplex());
  CHECK(lo.value == doctest::Approx(0).scale(1));
  CHECK(lo.z.cwiseAbs().maxCoeff() <= 1e-12);
  auto hi = cdf_lp_certificate(s, 0.3, test::simplex());
  CHECK(hi.value == doctest::Approx(1));
  CHECK((hi.z.array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("pseudo observations: permutation of ranks, ties, double-loop oracle") {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  matrix_t d(30, 2);
  for (index_t i = 0; i < 30; ++i) d(i, 0) = u(rng), d(i, 1) = u(rng);
  const matrix_t p = copula_pseudo_observations(d);
  for (index_t k = 0; k < 2; ++k) {
    std::vector<double> col(p.col(k).data(), p.col(k).data() + 30);
    std::sort(col.begin(), col.end());
    for (std::size_t i = 0; i < 30; ++i) CHECK(col[i] == doctest::Approx((i + 1) / 30.0));
    for (index_t i = 0; i < 30; ++i) {
      int c = 0;
      for (index_t j = 0; j < 30; ++j) c += d(j, k) <= d(i, k);
      CHECK(p(i, k) == c / 30.0);
    }
  }
  CHECK((copula_pseudo_observations(matrix_t::Constant(5, 1, 0.2)).array() == 1.0).all());
}

TEST_CASE("CDF is nondecreasing") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  vector_t s(20);
  for (index_t i = 0; i < 20; ++i) s(i) = u(rng);
  double prev = 0;
  for (double eta = -0.6; eta <= 0.6; eta += 0.003) {
    const double v = empirical_cdf_value(s, eta);
    CHECK(v >= prev);
    prev = v;
  }
}
