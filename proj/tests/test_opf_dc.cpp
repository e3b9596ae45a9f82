#include "cdro/errors.hpp"
#include "cdro/opf_dc.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <filesystem>

using namespace cdro;

namespace {

DcNetwork single_node(double wind_cap) {
  DcNetwork net;
  net.buses = 1;
  net.generators.push_back({"G1", 0, 10.0, 3.0, 2.0, 0.0, 200.0, 100.0});
  net.loads.push_back({0, 150.0});
  net.wind.push_back({0, wind_cap, 0.5});
  net.compute_ptdf();
  return net;
}

UncertaintyDataset symmetric(double delta, index_t n) {
  matrix_t d(n, 1);
  for (index_t i = 0; i < n; ++i) d(i, 0) = i % 2 ? delta : -delta;
  return test::dataset_from(d);
}

}  // namespace

TEST_CASE("three-bus triangle PTDF") {
  const std::vector<DcLine> lines{{0, 1, 0.1, 100}, {1, 2, 0.1, 100}, {0, 2, 0.1, 100}};
  const matrix_t p = bus_ptdf(3, lines, 0);
  CHECK(p.col(0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(p(0, 1) == doctest::Approx(-2.0 / 3));
  CHECK(p(1, 1) == doctest::Approx(1.0 / 3));
  CHECK(p(2, 1) == doctest::Approx(-1.0 / 3));
}

TEST_CASE("24-bus instance totals") {
  auto net = make_rts24(2);
  double cap = 0, res = 0;
  for (const auto& g : net.generators) cap += g.gmax, res += g.rmax;
  CHECK(cap == doctest::Approx(2362.5));
  CHECK(res == doctest::Approx(798));
  CHECK(net.demand().sum() == doctest::Approx(2207));
  CHECK(net.wind_capacity().sum() == doctest::Approx(1000));
  CHECK(net.lines.size() == 34);
  CHECK(net.ptdf_gen.rows() == 34);
  CHECK_NOTHROW(validate(net));
  CHECK(make_rts24(12).wind.size() == 12);
  CHECK_THROWS_AS(make_rts24(13), InvalidArgument);
}

TEST_CASE("network JSON round trip") {
  auto net = make_rts24(3);
  const auto path = (std::filesystem::temp_directory_path() / "cdro_rts24.json").string();
  write_dc_network(net, path);
  auto back = read_dc_network(path);
  CHECK(back.buses == net.buses);
  CHECK(back.generators.size() == net.generators.size());
  CHECK(back.generators[3].cost == net.generators[3].cost);
  CHECK(back.lines[20].reactance == net.lines[20].reactance);
  CHECK((back.ptdf_gen - net.ptdf_gen).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("validation catches broken networks") {
  auto net = make_rts24(2);
  net.generators[0].gmin = net.generators[0].gmax + 1;
  CHECK_THROWS(validate(net));
  net = make_rts24(2);
  net.ptdf_gen.resize(3, 3);
  CHECK_THROWS_AS(validate(net), DimensionError);
}

TEST_CASE("no deviation and costly reserves: nothing booked") {
  auto net = single_node(60);
  auto ds = test::dataset_from(matrix_t::Zero(6, 1));
  DcOpfSettings s;
  s.spec.theta1 = 0.0;
  s.spec.theta2 = 5.0;
  auto m = build_dc_opf(net, ds, s);
  auto sol = solve_day_ahead(*m, test::simplex());
  REQUIRE(sol.optimal());
  CHECK(sol.r_up(0) == doctest::Approx(0).scale(1));
  CHECK(sol.r_dn(0) == doctest::Approx(0).scale(1));
  CHECK(sol.recourse_cost == doctest::Approx(0).scale(1));
  CHECK(sol.g(0) == doctest::Approx(120));
}

TEST_CASE("single node, symmetric samples: reserves cover the full swing") {
  for (double delta : {0.1, 0.3}) {
    auto net = single_node(80);
    auto ds = symmetric(delta, 4);
    DcOpfSettings s;
    s.spec.theta1 = 0.0;
    s.eps_up = s.eps_dn = 0.01;
    auto m = build_dc_opf(net, ds, s);
    auto sol = solve_day_ahead(*m, test::simplex());
    REQUIRE(sol.optimal());
    CHECK(sol.r_up(0) == doctest::Approx(80 * delta));
    CHECK(sol.r_dn(0) == doctest::Approx(80 * delta));
    CHECK(sol.V(0, 0) == doctest::Approx(-80));
    CHECK(dc_residuals(net, ds, sol).max() <= 1e-9);
  }
}

TEST_CASE("solutions are deterministic and satisfy the invariants") {
  std::mt19937_64 rng(3);
  auto net = make_rts24(2);
  auto ds = test::random_dataset(rng, 6, 2, 0.5);
  ds.capacities = net.wind_capacity();
  DcOpfSettings s;
  s.spec.theta1 = 0.05;
  s.spec.theta2 = 0.1;
  auto a = solve_day_ahead(*build_dc_opf(net, ds, s), test::highs());
  auto b = solve_day_ahead(*build_dc_opf(net, ds, s), test::highs());
  REQUIRE(a.optimal());
  CHECK(std::fabs(a.objective - b.objective) <= 1e-9 * std::max(1.0, std::fabs(a.objective)));
  CHECK(dc_residuals(net, ds, a).max() <= 1e-6);
  CHECK(a.objective == doctest::Approx(a.day_ahead_cost + a.recourse_cost));
}

TEST_CASE("tiny radii on the copula model do not crash") {
  std::mt19937_64 rng(4);
  auto net = make_rts24(2);
  auto ds = test::random_dataset(rng, 6, 2, 0.5);
  DcOpfSettings s;
  s.spec.theta1 = 0.001;
  s.spec.theta2 = 0.001;
  auto sol = solve_day_ahead(*build_dc_opf(net, ds, s), test::highs());
  CHECK((sol.optimal() || sol.status == lp::SolveStatus::infeasible));
}

TEST_CASE("copula constraint never raises booked upward reserve on the single node") {
  auto net = single_node(80);
  std::mt19937_64 rng(8);
  auto ds = test::random_dataset(rng, 8, 1);
  DcOpfSettings m1;
  m1.spec.theta1 = 0.05;
  DcOpfSettings m2 = m1;
  m2.spec.theta2 = 0.02;
  auto a = solve_day_ahead(*build_dc_opf(net, ds, m1), test::highs());
  auto b = solve_day_ahead(*build_dc_opf(net, ds, m2), test::highs());
  REQUIRE(a.optimal());
  REQUIRE(b.optimal());
  CHECK(b.r_up.sum() <= a.r_up.sum() + 1e-6);
  CHECK(b.objective <= a.objective + 1e-6);
}

TEST_CASE("scenario violation is zero inside the hedged range") {
  auto net = single_node(80);
  auto ds = symmetric(0.2, 4);
  DcOpfSettings s;
  s.eps_up = s.eps_dn = 0.01;
  auto sol = solve_day_ahead(*build_dc_opf(net, ds, s), test::simplex());
  REQUIRE(sol.optimal());
  CHECK(dc_scenario_violation(net, ds, sol, ds.deviations) <= 1e-9);
  CHECK(dc_scenario_violation(net, ds, sol, (matrix_t(1, 1) << -0.3).finished()) == doctest::Approx(8));
}
