#include "cdro/errors.hpp"
#include "cdro/oos.hpp"
#include "cdro/scenario.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <atomic>
#include <stdexcept>

using namespace cdro;

namespace {

/** One bus, two units, one farm */
DcNetwork two_unit_bus() {
  DcNetwork net;
  net.buses = 1;
  net.generators.push_back({"cheap", 0, 10.0, 4.0, 3.0, 0.0, 150.0, 40.0});
  net.generators.push_back({"dear", 0, 30.0, 2.0, 1.0, 0.0, 150.0, 40.0});
  net.loads.push_back({0, 200.0});
  net.wind.push_back({0, 100.0, 0.5});
  net.compute_ptdf();
  return net;
}

DayAheadSolution fixed_plan(const DcNetwork& net, vector_t g, vector_t r_up, vector_t r_dn) {
  DayAheadSolution s;
  s.status = lp::SolveStatus::optimal;
  s.g = std::move(g);
  s.r_up = std::move(r_up);
  s.r_dn = std::move(r_dn);
  s.V = matrix_t::Constant(static_cast<index_t>(net.generators.size()), 1, -50.0);
  s.day_ahead_cost = 1234.0;
  return s;
}

/** Merit order: cover a deficit with the cheaper reserve first, shed the rest; surplus is spilled */
double merit_order_cost(const DcNetwork& net, const DayAheadSolution& s, double deficit, const RealTimePrices& p) {
  if (deficit <= 0) return -deficit * p.spill;
  std::vector<std::pair<double, double>> offers;
  for (std::size_t i = 0; i < net.generators.size(); ++i)
    offers.emplace_back(net.generators[i].cost, s.r_up(static_cast<index_t>(i)));
  std::sort(offers.begin(), offers.end());
  double cost = 0;
  for (const auto& [c, q] : offers) {
    const double take = std::min(q, deficit);
    if (c >= p.voll) break;
    cost += c * take;
    deficit -= take;
  }
  return cost + p.voll * deficit;
}

}  // namespace

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(500);
  parallel_for(500, 4, [&](index_t i) { hits[static_cast<std::size_t>(i)]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(50, 3, [](index_t i) { if (i == 17) throw std::runtime_error("x"); }),
                  std::runtime_error);
  CHECK_NOTHROW(parallel_for(0, 4, [](index_t) { throw std::runtime_error("never"); }));
}

TEST_CASE("zero deviation: no action, no cost") {
  auto net = two_unit_bus();
  auto s = fixed_plan(net, (vector_t(2) << 100, 50).finished(), (vector_t(2) << 10, 10).finished(),
                      (vector_t(2) << 10, 10).finished());
  auto rt = realtime_redispatch(s, net, vector_t::Constant(1, 0.5), vector_t::Zero(1), {}, test::simplex());
  REQUIRE(rt.optimal());
  CHECK(rt.cost == doctest::Approx(0).scale(1));
  CHECK(rt.shed.sum() == doctest::Approx(0).scale(1));
  CHECK(rt.curtail.sum() == doctest::Approx(0).scale(1));
  CHECK(rt.recourse.cwiseAbs().sum() == doctest::Approx(0).scale(1));
}

TEST_CASE("deficit beyond booked upward reserve is shed") {
  auto net = two_unit_bus();
  auto s = fixed_plan(net, (vector_t(2) << 100, 50).finished(), (vector_t(2) << 5, 7).finished(),
                      (vector_t(2) << 0, 0).finished());
  // 100 MW farm at forecast 0.5 falls to 0.2: deficit 30 MW, reserve 12 MW
  auto rt = realtime_redispatch(s, net, vector_t::Constant(1, 0.5), vector_t::Constant(1, -0.3), {}, test::simplex());
  REQUIRE(rt.optimal());
  CHECK(rt.shed.sum() == doctest::Approx(18));
  CHECK(rt.recourse.sum() == doctest::Approx(12));
}

TEST_CASE("single-bus redispatch against the merit order") {
  auto net = two_unit_bus();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 40; ++rep) {
    auto s = fixed_plan(net, (vector_t(2) << 100, 50).finished(), (vector_t(2) << 20 * u(rng), 20 * u(rng)).finished(),
                        (vector_t(2) << 20 * u(rng), 20 * u(rng)).finished());
    RealTimePrices p;
    p.voll = rep % 2 ? 1000 : 20;  // the cheap VOLL sits between the two unit costs
    p.spill = rep % 3 == 0 ? 0.0 : 5.0;
    const double xi = u(rng) - 0.5;
    auto rt = realtime_redispatch(s, net, vector_t::Constant(1, 0.5), vector_t::Constant(1, xi), p, test::simplex());
    REQUIRE(rt.optimal());
    double expect = merit_order_cost(net, s, -100 * xi, p);
    // moving a unit down costs c |activation| >= spill here, so surplus is spilled
    if (xi > 0) expect = p.spill * 100 * xi;
    CHECK(rt.cost == doctest::Approx(expect).epsilon(1e-9).scale(1));
  }
}

TEST_CASE("signed recourse credits downward activation") {
  auto net = two_unit_bus();
  auto s = fixed_plan(net, (vector_t(2) << 100, 50).finished(), (vector_t(2) << 0, 0).finished(),
                      (vector_t(2) << 10, 0).finished());
  RealTimePrices p;
  p.signed_recourse = true;
  p.spill = 50;
  auto rt = realtime_redispatch(s, net, vector_t::Constant(1, 0.5), vector_t::Constant(1, 0.2), p, test::simplex());
  REQUIRE(rt.optimal());
  // 20 MW surplus: 10 MW down on the cheap unit earns 10 $/MWh, the other 10 MW are spilled
  CHECK(rt.cost == doctest::Approx(-100 + 500));
}

TEST_CASE("out-of-sample aggregation") {
  auto net = two_unit_bus();
  auto s = fixed_plan(net, (vector_t(2) << 100, 50).finished(), (vector_t(2) << 5, 5).finished(),
                      (vector_t(2) << 5, 5).finished());
  UncertaintyDataset zero = test::dataset_from(matrix_t::Zero(7, 1));
  auto r0 = evaluate_out_of_sample(s, net, zero, test::simplex());
  CHECK(r0.expected_cost == doctest::Approx(1234));
  CHECK(r0.std_dev == doctest::Approx(0).scale(1));
  CHECK(r0.eens == doctest::Approx(0).scale(1));
  CHECK(r0.per_sample.size() == 7);

  UncertaintyDataset one = test::dataset_from((matrix_t(1, 1) << -0.3).finished());
  auto r1 = evaluate_out_of_sample(s, net, one, test::simplex());
  CHECK(r1.std_dev == doctest::Approx(0).scale(1));
  CHECK(r1.expected_cost == doctest::Approx(1234 + 5 * 10 + 5 * 30 + 20 * 1000));
  CHECK(r1.eens == doctest::Approx(20));
  bool named = false;
  for (const auto& v : r1.violation_rates)
    if (v.name == "reserve_up:cheap") {
      named = true;
      CHECK(v.rate == doctest::Approx(1.0));
    }
  CHECK(named);
}

TEST_CASE("aggregation does not depend on the thread count") {
  auto net = make_rts24(2);
  GeneratorSpec g{equicorrelation(2, 0.5), Marginal::beta(2, 2), 80, 5, net.wind_capacity()};
  auto [in, out] = split_dataset(sample_gaussian_copula(g), 5, 2);
  DcOpfSettings st;
  st.spec.theta1 = 0.01;
  auto sol = solve_day_ahead(*build_dc_opf(net, in, st), test::highs());
  REQUIRE(sol.optimal());
  OosOptions o1, o4;
  o1.threads = 1;
  o4.threads = 4;
  auto a = evaluate_out_of_sample(sol, net, out, test::highs(), o1);
  auto b = evaluate_out_of_sample(sol, net, out, test::highs(), o4);
  CHECK(a.expected_cost == b.expected_cost);
  CHECK(a.std_dev == b.std_dev);
  CHECK(a.eens == b.eens);
  REQUIRE(a.per_sample.size() == 75);
  for (std::size_t i = 0; i < a.per_sample.size(); ++i) CHECK(a.per_sample[i].index == static_cast<index_t>(i));
  CHECK(a.failures == 0);
}

TEST_CASE("radial replay on the feeder") {
  auto net = make_feeder15();
  GeneratorSpec g{equicorrelation(2, 0.5), Marginal::beta(2, 2), 60, 4, {}};
  auto [in, out] = split_dataset(sample_gaussian_copula(g), 10, 1);
  RadialOpfSettings s;
  s.spec.theta1 = 0.02;
  auto sol = solve_radial(*build_lindistflow_opf(net, in, s), test::highs());
  REQUIRE(sol.optimal());
  auto rt0 = realtime_redispatch(sol, net, in.forecast, vector_t::Zero(2), {}, test::highs());
  REQUIRE(rt0.optimal());
  CHECK(rt0.cost == doctest::Approx(0).scale(1));
  auto rep = evaluate_out_of_sample(sol, net, out, test::highs());
  CHECK(rep.failures == 0);
  CHECK(std::isfinite(rep.eens));
  CHECK(rep.expected_cost >= rep.day_ahead_cost - 1e-9);
  CHECK(rep.per_sample.size() == 50);
}
