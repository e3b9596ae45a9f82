#include "cdro/errors.hpp"
#include "cdro/opf_radial.hpp"
#include "cdro/scenario.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

using namespace cdro;
using lp::LinExpr;

namespace {

/** 0 -- 1 -- 2 with loads at 1 and 2, substation only, an empty wind unit at node 2 */
RadialNetwork three_node() {
  RadialNetwork net;
  net.nodes.resize(3);
  net.nodes[0].controllable = true;
  net.nodes[0].gPmin = -5, net.nodes[0].gPmax = 5, net.nodes[0].gQmin = -5, net.nodes[0].gQmax = 5;
  net.nodes[0].cost = 40;
  net.nodes[0].vmin = 0.9, net.nodes[0].vmax = 1.1;
  net.nodes[1].dP = 0.3, net.nodes[1].dQ = 0.1, net.nodes[1].vmin = 0.8, net.nodes[1].vmax = 1.1;
  net.nodes[2].dP = 0.2, net.nodes[2].dQ = 0.05, net.nodes[2].vmin = 0.8, net.nodes[2].vmax = 1.1;
  net.lines = {{0, 1, 0.01, 0.02, 3.0}, {1, 2, 0.03, 0.04, 3.0}};
  net.wind = {{2, 0.1, 0.0, 0.0}};
  net.build_topology();
  return net;
}

/** Independent recomputation: subtree sums from the leaves up, voltages from the root down */
RealTimeState rederive(const RadialNetwork& net, const RadialSolution& sol, const vector_t& xi) {
  const index_t n = net.size();
  vector_t cap(static_cast<index_t>(net.wind.size()));
  for (std::size_t w = 0; w < net.wind.size(); ++w) cap(static_cast<index_t>(w)) = net.wind[w].capacity;
  RealTimeState s;
  s.gP = s.gQ = vector_t::Zero(n);
  vector_t injP = vector_t::Zero(n), injQ = vector_t::Zero(n);  // withdrawal d - g - wind deviation
  for (index_t i = 0; i < n; ++i) {
    double vP = 0, vQ = 0;
    for (std::size_t w = 0; w < net.wind.size(); ++w) {
      vP += sol.V(i, static_cast<index_t>(w)) * cap(static_cast<index_t>(w)) * xi(static_cast<index_t>(w));
      vQ += sol.V(i, static_cast<index_t>(w)) * cap(static_cast<index_t>(w)) * xi(static_cast<index_t>(w)) *
            net.wind[w].q_ratio;
    }
    s.gP(i) = sol.gP(i) + vP;
    s.gQ(i) = sol.gQ(i) + vQ;
  }
  // day-ahead flows minus deviations, summed over subtrees
  std::vector<double> subP(static_cast<std::size_t>(n), 0.0), subQ(static_cast<std::size_t>(n), 0.0);
  for (index_t i = 1; i < n; ++i) {
    subP[static_cast<std::size_t>(i)] = -(s.gP(i) - sol.gP(i));
    subQ[static_cast<std::size_t>(i)] = -(s.gQ(i) - sol.gQ(i));
  }
  for (std::size_t w = 0; w < net.wind.size(); ++w) {
    const double d = cap(static_cast<index_t>(w)) * xi(static_cast<index_t>(w));
    subP[static_cast<std::size_t>(net.wind[w].node)] -= d;
    subQ[static_cast<std::size_t>(net.wind[w].node)] -= d * net.wind[w].q_ratio;
  }
  // leaves first: repeat passes until stable (tiny trees)
  std::vector<double> accP = subP, accQ = subQ;
  for (index_t pass = 0; pass < n; ++pass) {
    accP = subP, accQ = subQ;
    for (index_t rep = 0; rep < n; ++rep) {
      std::vector<double> nextP = subP, nextQ = subQ;
      for (const auto& ln : net.lines) {
        nextP[static_cast<std::size_t>(ln.from)] += accP[static_cast<std::size_t>(ln.to)];
        nextQ[static_cast<std::size_t>(ln.from)] += accQ[static_cast<std::size_t>(ln.to)];
      }
      accP = nextP, accQ = nextQ;
    }
  }
  s.fP = sol.fP, s.fQ = sol.fQ;
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    s.fP(static_cast<index_t>(l)) += accP[static_cast<std::size_t>(net.lines[l].to)];
    s.fQ(static_cast<index_t>(l)) += accQ[static_cast<std::size_t>(net.lines[l].to)];
  }
  s.u = vector_t::Constant(n, sol.u(0));
  for (index_t pass = 0; pass < n; ++pass)
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      const auto& ln = net.lines[l];
      s.u(ln.to) = s.u(ln.from) - 2 * (ln.R * s.fP(static_cast<index_t>(l)) + ln.X * s.fQ(static_cast<index_t>(l)));
    }
  return s;
}

UncertaintyDataset feeder_dataset(index_t n, std::uint64_t seed) {
  GeneratorSpec g{equicorrelation(2, 0.5), Marginal::beta(2, 2), n, seed, {}};
  return sample_gaussian_copula(g);
}

bool point_feasible(double fbar, int k, double x, double y) {
  lp::ModelBuilder m;
  auto fP = m.add_var(x, x), fQ = m.add_var(y, y);
  polygonal_soc(fbar, k, fP, fQ, m);
  m.set_objective(LinExpr(0.0), lp::ObjSense::minimize);
  return lp::solve(m, test::simplex()).optimal();
}

}  // namespace

TEST_CASE("topology maps of the three-node feeder") {
  auto net = three_node();
  CHECK(net.line_into[0] == -1);
  CHECK(net.line_into[2] == 1);
  CHECK(net.root_path[2] == std::vector<index_t>{0, 1});
  CHECK(net.downstream[0].size() == 2);
  CHECK(net.controllable == std::vector<index_t>{0});
}

TEST_CASE("broken trees are rejected") {
  auto net = three_node();
  net.lines[1].from = 2;  // self loop
  CHECK_THROWS_AS(net.build_topology(), InvalidArgument);
  net = three_node();
  net.lines.pop_back();
  CHECK_THROWS_AS(net.build_topology(), InvalidArgument);
}

TEST_CASE("three-node LinDistFlow matches the hand calculation") {
  auto net = three_node();
  auto ds = test::dataset_from(matrix_t::Zero(4, 1), 0.0);
  RadialOpfSettings s;
  auto m = build_lindistflow_opf(net, ds, s);
  auto sol = solve_radial(*m, test::simplex());
  REQUIRE(sol.optimal());
  // P01 = 0.5, Q01 = 0.15; P12 = 0.2, Q12 = 0.05
  CHECK(sol.fP(0) == doctest::Approx(0.5));
  CHECK(sol.fQ(1) == doctest::Approx(0.05));
  const double u1 = 1 - 2 * (0.01 * 0.5 + 0.02 * 0.15);
  const double u2 = u1 - 2 * (0.03 * 0.2 + 0.04 * 0.05);
  CHECK(sol.u(0) == doctest::Approx(1));
  CHECK(sol.u(1) == doctest::Approx(u1));
  CHECK(sol.u(2) == doctest::Approx(u2));
  CHECK(sol.gP(0) == doctest::Approx(0.5));
  CHECK(radial_residuals(net, ds, sol).max() <= 1e-9);
}

TEST_CASE("feeder JSON round trip") {
  auto net = make_feeder15();
  const auto path = (std::filesystem::temp_directory_path() / "cdro_feeder.json").string();
  write_radial_network(net, path);
  auto back = read_radial_network(path);
  CHECK(back.size() == 15);
  CHECK(back.lines[7].R == net.lines[7].R);
  CHECK(back.base_mva == net.base_mva);
  CHECK(back.controllable == net.controllable);
}

TEST_CASE("fifteen-node feeder solves and its real-time state is consistent") {
  auto net = make_feeder15();
  CHECK_NOTHROW(validate(net));
  double wind = 0, units = 0;
  for (const auto& w : net.wind) wind += w.capacity;
  for (index_t i : net.controllable)
    if (i != 0) units += net.nodes[static_cast<std::size_t>(i)].gPmax;
  CHECK(wind == doctest::Approx(1.0));
  CHECK(units == doctest::Approx(2.0));

  auto [in, out] = split_dataset(feeder_dataset(200, 3), 20, 1);
  RadialOpfSettings s;
  s.spec.theta1 = 0.02;
  s.spec.theta2 = 0.05;
  auto m = build_lindistflow_opf(net, in, s);
  auto sol = solve_radial(*m, test::highs());
  REQUIRE(sol.optimal());
  CHECK(radial_residuals(net, in, sol).max() <= 1e-6);

  // zero deviation: day-ahead state
  auto z = realtime_state(sol, net, vector_t::Zero(2));
  CHECK((z.gP - sol.gP).cwiseAbs().maxCoeff() == 0.0);
  CHECK((z.fP - sol.fP).cwiseAbs().maxCoeff() == 0.0);
  CHECK((z.u - sol.u).cwiseAbs().maxCoeff() <= 1e-12);

  for (index_t i = 0; i < 10; ++i) {
    const vector_t xi = out.deviations.row(i).transpose();
    auto st = realtime_state(sol, net, xi);
    // affine in xi
    auto half = realtime_state(sol, net, 0.5 * xi);
    CHECK(((half.u - z.u) * 2 - (st.u - z.u)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(((half.fQ - z.fQ) * 2 - (st.fQ - z.fQ)).cwiseAbs().maxCoeff() <= 1e-12);
    // independent recomputation
    auto ref = rederive(net, sol, xi);
    CHECK((st.gP - ref.gP).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((st.fP - ref.fP).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((st.fQ - ref.fQ).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((st.u - ref.u).cwiseAbs().maxCoeff() <= 1e-9);
    // substation absorbs the total imbalance
    CHECK((st.gP.sum() - sol.gP.sum()) == doctest::Approx(-xi.dot(vector_t::Constant(2, 0.5))).scale(1));
  }
}

TEST_CASE("each chance-constrained limit at zero radii holds on at least half the samples") {
  auto net = make_feeder15();
  auto ds = feeder_dataset(40, 9);
  RadialOpfSettings s;
  s.eps_gen_up = s.eps_gen_dn = s.eps_volt_up = s.eps_volt_dn = 0.5;
  s.spec.theta2 = 0.0;
  auto sol = solve_radial(*build_lindistflow_opf(net, ds, s), test::highs());
  REQUIRE(sol.optimal());
  // CVaR at level eps bounds each limit's in-sample violation share by eps; the union is not bounded
  std::map<std::string, int> bad;
  for (index_t k = 0; k < ds.sample_count(); ++k) {
    const auto st = realtime_state(sol, net, ds.deviations.row(k).transpose());
    for (index_t i : net.controllable) {
      const auto& nd = net.nodes[static_cast<std::size_t>(i)];
      bad["gP_up" + std::to_string(i)] += st.gP(i) - nd.gPmax > 1e-7;
      bad["gP_dn" + std::to_string(i)] += nd.gPmin - st.gP(i) > 1e-7;
    }
    for (index_t i = 1; i < net.size(); ++i) {
      const auto& nd = net.nodes[static_cast<std::size_t>(i)];
      bad["v_up" + std::to_string(i)] += st.u(i) - nd.vmax * nd.vmax > 1e-7;
      bad["v_dn" + std::to_string(i)] += nd.vmin * nd.vmin - st.u(i) > 1e-7;
    }
  }
  for (const auto& [name, count] : bad) {
    INFO(name);
    CHECK(count <= ds.sample_count() / 2);
  }
}

TEST_CASE("polygonal flow limit geometry") {
  CHECK(point_feasible(1.0, 4, 1.0, 0.0));
  CHECK(point_feasible(1.0, 4, 0.0, -1.0));
  const double c = std::cos(std::numbers::pi / 4);
  CHECK_FALSE(point_feasible(1.0, 4, c, c));
  CHECK(point_feasible(1.0, 64, 0.999 * c, 0.999 * c));
  // 32 faces: the boundary lies between fbar cos(pi/32) and fbar in every direction
  for (int m = 0; m < 64; ++m) {
    const double th = 2 * std::numbers::pi * (m + 0.37) / 64;
    CHECK(point_feasible(1.0, 32, 0.9999 * std::cos(th) * std::cos(std::numbers::pi / 32),
                         0.9999 * std::sin(th) * std::cos(std::numbers::pi / 32)));
    CHECK_FALSE(point_feasible(1.0, 32, 1.0001 * std::cos(th), 1.0001 * std::sin(th)));
  }
  lp::ModelBuilder m;
  auto a = m.add_var(0, 1), b = m.add_var(0, 1);
  CHECK_THROWS(polygonal_soc(1.0, 3, a, b, m));
  CHECK_THROWS(polygonal_soc(0.0, 8, a, b, m));
}
