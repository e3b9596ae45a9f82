#include "cdro/core_model.hpp"
#include "cdro/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace cdro;

TEST_CASE("validate_dataset accepts rows inside the support") {
  std::mt19937_64 rng(3);
  auto ds = test::random_dataset(rng, 20, 3);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  CHECK(validate_dataset(ds, sp).empty());
  CHECK_NOTHROW(require_valid(ds, sp));
}

TEST_CASE("validate_dataset flags an entry above 1 - mu") {
  auto ds = test::dataset_from((matrix_t(2, 1) << 0.1, 1.2).finished());
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  auto v = validate_dataset(ds, sp);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::above_support);
  CHECK(v[0].row == 1);
  CHECK(v[0].col == 0);
  CHECK(v[0].bound == doctest::Approx(0.5));
  CHECK_THROWS_AS(require_valid(ds, sp), InvalidArgument);
}

TEST_CASE("validate_dataset matches a row-by-row scan") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int rep = 0; rep < 50; ++rep) {
    UncertaintyDataset ds;
    ds.forecast = vector_t::Constant(3, 0.4);
    ds.capacities = vector_t::Ones(3);
    ds.deviations.resize(8, 3);
    for (index_t i = 0; i < 8; ++i)
      for (index_t k = 0; k < 3; ++k) ds.deviations(i, k) = u(rng);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    std::vector<std::pair<index_t, index_t>> scan;
    for (index_t i = 0; i < 8; ++i)
      for (index_t k = 0; k < 3; ++k)
        if (ds.deviations(i, k) < -0.4 || ds.deviations(i, k) > 0.6) scan.emplace_back(i, k);
    std::vector<std::pair<index_t, index_t>> got;
    for (const auto& v : validate_dataset(ds, sp))
      if (v.row >= 0) got.emplace_back(v.row, v.col);
    std::sort(got.begin(), got.end());
    CHECK(got == scan);
  }
}

TEST_CASE("dimension mismatch names both sizes") {
  std::mt19937_64 rng(1);
  auto ds = test::random_dataset(rng, 4, 2);
  auto sp = SupportPolytope::for_forecast(vector_t::Constant(3, 0.5));
  try {
    validate_dataset(ds, sp);
    FAIL("expected a DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find('2') != std::string::npos);
    CHECK(msg.find('3') != std::string::npos);
  }
}

TEST_CASE("support polytope rows are plus and minus identity") {
  auto sp = SupportPolytope::for_forecast((vector_t(2) << 0.3, 0.6).finished());
  CHECK(sp.C.rows() == 4);
  CHECK(sp.xi_min(0) == doctest::Approx(-0.3));
  CHECK(sp.xi_max(1) == doctest::Approx(0.4));
  const vector_t x = (vector_t(2) << 0.1, -0.2).finished();
  CHECK(((sp.C * x).array() <= sp.D.array()).all());
}

TEST_CASE("dataset round-trips bit-exactly") {
  std::mt19937_64 rng(5);
  auto ds = test::random_dataset(rng, 17, 3, 0.37);
  ds.capacities = (vector_t(3) << 100.0, 250.5, 1.0 / 3.0).finished();
  ds.metadata["seed"] = "5";
  const auto path = (std::filesystem::temp_directory_path() / "cdro_roundtrip.csv").string();
  write_dataset(ds, path);
  auto back = read_dataset(path);
  CHECK(back.deviations == ds.deviations);
  CHECK(back.forecast == ds.forecast);
  CHECK(back.capacities == ds.capacities);
  CHECK(back.metadata.at("seed") == "5");
}

TEST_CASE("ambiguity spec validation") {
  AmbiguitySpec s;
  s.theta1 = -0.1;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
  s.theta1 = 0.1;
  s.theta2 = -1.0;
  CHECK_THROWS_AS(validate(s), InvalidArgument);
  s.theta2 = 0.2;
  CHECK_NOTHROW(validate(s));
  CHECK(parse_ground_norm("inf_norm") == GroundNorm::inf_norm);
  CHECK_THROWS(parse_ground_norm("two_norm"));
}

TEST_CASE("discrete distribution weights must sum to one") {
  DiscreteDistribution d;
  d.points = matrix_t::Zero(2, 1);
  d.weights = (vector_t(2) << 0.5, 0.5 + 1e-10).finished();
  CHECK_NOTHROW(validate(d));
  d.weights(1) = 0.6;
  CHECK_THROWS(validate(d));
  d.weights = (vector_t(2) << 1.2, -0.2).finished();
  CHECK_THROWS(validate(d));
}

TEST_CASE("certain expressions") {
  auto e = AffineUncertainExpression::fixed(vector_t::Zero(2), 3.0);
  CHECK(e.certain());
  auto f = AffineUncertainExpression::fixed((vector_t(2) << 0.0, 1.0).finished(), 0.0);
  CHECK_FALSE(f.certain());
}
