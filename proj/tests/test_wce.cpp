#include "cdro/copula_relaxation.hpp"
#include "cdro/empirical.hpp"
#include "cdro/errors.hpp"
#include "cdro/transport.hpp"
#include "cdro/wce.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace cdro;
using lp::LinExpr;

namespace {

struct BlockValue {
  double value = 0.0;
  lp::SolveResult result;
  WceBlock block;
  std::unique_ptr<lp::ModelBuilder> model;
};

/** min over the block variables of the block's objective contribution */
BlockValue block_value(const std::vector<AffineUncertainExpression>& pieces, const UncertaintyDataset& ds,
                       const SupportPolytope& sp, const AmbiguitySpec& spec, WceOptions opt,
                       const lp::LpBackend& backend) {
  BlockValue out;
  out.model = std::make_unique<lp::ModelBuilder>();
  WceContext ctx(*out.model, ds, sp, spec, opt);
  out.block = ctx.add_block(pieces);
  out.model->set_objective(out.block.objective_contribution, lp::ObjSense::minimize);
  out.result = lp::solve(*out.model, backend);
  REQUIRE(out.result.optimal());
  out.value = out.result.objective_value;
  return out;
}

double single(const vector_t& a, double b, const UncertaintyDataset& ds, const SupportPolytope& sp,
              const AmbiguitySpec& spec, WceOptions opt = {}, const lp::LpBackend* be = nullptr) {
  return block_value({AffineUncertainExpression::fixed(a, b)}, ds, sp, spec, opt, be ? *be : test::simplex()).value;
}

vector_t random_vector(std::mt19937_64& rng, index_t n, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  vector_t v(n);
  for (index_t k = 0; k < n; ++k) v(k) = u(rng);
  return v;
}

}  // namespace

TEST_CASE("McCormick envelope is exact at box corners and bounds the product inside") {
  const Bounds xb{-0.5, 0.5}, yb{0.0, 1.0};
  for (double x : {-0.5, 0.5})
    for (double y : {0.0, 1.0})
      for (auto sense : {lp::ObjSense::minimize, lp::ObjSense::maximize}) {
        lp::ModelBuilder m;
        auto vx = m.add_var(x, x), vy = m.add_var(y, y);
        auto w = mccormick_envelope(m, vx, vy, xb, yb);
        m.set_objective(LinExpr(w), sense);
        auto r = lp::solve(m, test::simplex());
        REQUIRE(r.optimal());
        CHECK(r.value(w) == doctest::Approx(x * y).scale(1));
      }
  // interior: the envelope brackets x y
  lp::ModelBuilder m;
  auto vx = m.add_var(0.1, 0.1), vy = m.add_var(0.3, 0.3);
  auto w = mccormick_envelope(m, vx, vy, xb, yb);
  m.set_objective(LinExpr(w), lp::ObjSense::maximize);
  auto hi = lp::solve(m, test::simplex());
  m.set_objective(LinExpr(w), lp::ObjSense::minimize);
  auto lo = lp::solve(m, test::simplex());
  CHECK(lo.value(w) <= 0.03 + 1e-12);
  CHECK(hi.value(w) >= 0.03 - 1e-12);
  CHECK(lo.value(w) == doctest::Approx(std::max(-0.15, -0.25)));
  CHECK(hi.value(w) == doctest::Approx(std::min(0.5 * 0.3 + 0.0 * 0.1 - 0.0, -0.5 * 0.3 + 1.0 * 0.1 + 0.5)));
  CHECK_THROWS_AS(mccormick_envelope(m, vx, vy, {0, kInf}, yb), InvalidArgument);
}

TEST_CASE("copula fiber: envelopes sandwich the CDF, hull is convex") {
  const vector_t s = (vector_t(4) << -0.3, 0.1, 0.2, -0.05).finished();
  auto f = make_copula_fiber(s, -0.5, 0.5, 5.0);
  for (double xi = -0.5; xi <= 0.5; xi += 0.001) CHECK(f.upper(xi) >= f.cdf(xi) - 1e-12);
  CHECK(f.upper(-0.5) == doctest::Approx(0));
  CHECK(f.upper(0.2) == doctest::Approx(1));
  CHECK(f.upper(0.5) == doctest::Approx(1));
  CHECK(f.lower(0.5) == doctest::Approx(1));
  for (double xi = -0.5; xi <= 0.5; xi += 0.01) CHECK(f.lower(xi) <= f.upper(xi) + 1e-12);
  REQUIRE(f.hull.size() >= 3);
  for (std::size_t m = 0; m < f.hull.size(); ++m) {
    const auto& o = f.hull[m];
    const auto& a = f.hull[(m + 1) % f.hull.size()];
    const auto& b = f.hull[(m + 2) % f.hull.size()];
    CHECK((a - o).x() * (b - o).y() - (a - o).y() * (b - o).x() > 0);
  }
  const point2_t dir(0.3, 1.0);
  const auto v = f.support_vertex(dir);
  for (const auto& p : f.hull) CHECK(dir.dot(p) <= dir.dot(f.hull[static_cast<std::size_t>(v)]) + 1e-15);
}

TEST_CASE("cover bound makes the lower envelope stay below the CDF") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.5, 0.499);
  for (int rep = 0; rep < 30; ++rep) {
    vector_t s(3 + rep % 8);
    for (index_t j = 0; j < s.size(); ++j) s(j) = u(rng);
    bool complete = false;
    const double vbar = sigma_cover_bound(s, -0.5, 0.5, &complete);
    CHECK(complete);
    auto f = make_copula_fiber(s, -0.5, 0.5, vbar);
    for (double xi = -0.5; xi < 0.5; xi += 0.001) CHECK(f.lower(xi) <= f.cdf(xi) + 1e-9);
    // strictly smaller bounds leave part of the graph outside
    auto g = make_copula_fiber(s, -0.5, 0.5, vbar * 0.9);
    auto below = [&](double x) { return static_cast<double>((s.array() < x).count()) / static_cast<double>(s.size()); };
    bool outside = g.lower(-0.5) > 1e-12;
    for (index_t j = 0; j < s.size(); ++j) outside |= g.lower(s(j)) > below(s(j)) + 1e-12;
    CHECK(outside);
  }
}

TEST_CASE("default sigma bound is at least 10 over N") {
  std::mt19937_64 rng(3);
  auto ds = test::random_dataset(rng, 40, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  CHECK(default_sigma_bound(ds, sp) >= 10.0 / 40 - 1e-15);
}

TEST_CASE("metric-ball reformulation equals the grid oracle") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 25; ++rep) {
    auto ds = test::random_dataset(rng, 1 + rep % 5, 1 + rep % 2);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    const vector_t a = random_vector(rng, ds.dim());
    AmbiguitySpec spec;
    spec.theta1 = 0.04 * (rep % 6);
    spec.ground_norm = rep % 3 == 0 ? GroundNorm::inf_norm : GroundNorm::one_norm;
    const double model = single(a, 0.3, ds, sp, spec);
    auto oracle = oracle_worst_case_expectation(a, 0.3, ds, sp, spec, {}, test::simplex());
    REQUIRE(oracle.feasible());
    CAPTURE(rep);
    // off-grid transport along several axes at once is out of the grid's reach under the max norm
    if (spec.ground_norm == GroundNorm::one_norm) CHECK(model == doctest::Approx(oracle.value).epsilon(1e-8));
    else CHECK(model >= oracle.value - 1e-9);
  }
}

TEST_CASE("metric ball of radius zero gives the sample average of a max of pieces") {
  std::mt19937_64 rng(5);
  auto ds = test::random_dataset(rng, 8, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  const vector_t a1 = random_vector(rng, 2), a2 = random_vector(rng, 2);
  AmbiguitySpec spec;
  auto bv = block_value({AffineUncertainExpression::fixed(a1, 0.1), AffineUncertainExpression::fixed(a2, -0.2)}, ds,
                        sp, spec, {}, test::simplex());
  double avg = 0;
  for (index_t i = 0; i < 8; ++i)
    avg += std::max(ds.deviations.row(i).dot(a1) + 0.1, ds.deviations.row(i).dot(a2) - 0.2) / 8;
  CHECK(bv.value == doctest::Approx(avg).epsilon(1e-9));
}

TEST_CASE("copula reformulation: projected, lazy projected and full dual agree") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 12; ++rep) {
    auto ds = test::random_dataset(rng, 2 + rep % 4, 1 + rep % 2);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    const vector_t a1 = random_vector(rng, ds.dim()), a2 = random_vector(rng, ds.dim());
    std::vector<AffineUncertainExpression> pieces{AffineUncertainExpression::fixed(a1, 0.0),
                                                  AffineUncertainExpression::fixed(a2, 0.1)};
    AmbiguitySpec spec;
    spec.theta1 = 0.05 + 0.03 * (rep % 3);
    spec.theta2 = 0.01 + 0.05 * (rep % 4);
    const double p = block_value(pieces, ds, sp, spec, {CopulaForm::projected, false, std::nullopt}, test::highs()).value;
    const double l = block_value(pieces, ds, sp, spec, {CopulaForm::projected, true, std::nullopt}, test::highs()).value;
    const double f = block_value(pieces, ds, sp, spec, {CopulaForm::full_dual, false, std::nullopt}, test::highs()).value;
    CHECK(l == doctest::Approx(p).epsilon(1e-7));
    CHECK(f == doctest::Approx(p).epsilon(1e-7));
  }
}

TEST_CASE("copula reformulation brackets the shared-coupling oracle from above") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 10; ++rep) {
    auto ds = test::random_dataset(rng, 2 + rep % 4, 2);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    const vector_t a = random_vector(rng, 2);
    AmbiguitySpec spec;
    spec.theta1 = 0.05 + 0.05 * (rep % 3);
    spec.theta2 = 0.02 + 0.04 * (rep % 3);
    const double m2 = single(a, 0.0, ds, sp, spec, {}, &test::highs());
    OracleOptions o;
    o.grid_points_per_dim = 7;
    auto oracle = oracle_worst_case_expectation(a, 0.0, ds, sp, spec, o, test::highs());
    REQUIRE(oracle.feasible());
    CHECK(m2 >= oracle.value - 1e-6);
    // the copula budget never raises the bound above the metric ball
    AmbiguitySpec m1 = spec;
    m1.theta2.reset();
    CHECK(m2 <= single(a, 0.0, ds, sp, m1, {}, &test::highs()) + 1e-7);
  }
}

TEST_CASE("copula radius at least |W| leaves the metric ball unchanged") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 8; ++rep) {
    auto ds = test::random_dataset(rng, 6, 2);
    auto sp = SupportPolytope::for_forecast(ds.forecast);
    const vector_t a = random_vector(rng, 2);
    AmbiguitySpec m1;
    m1.theta1 = 0.02 * rep;
    AmbiguitySpec m2 = m1;
    m2.theta2 = 2.0 + rep;
    CHECK(single(a, 0, ds, sp, m2, {}, &test::highs()) ==
          doctest::Approx(single(a, 0, ds, sp, m1, {}, &test::highs())).epsilon(1e-7));
  }
}

TEST_CASE("reformulated value is nondecreasing in both radii") {
  std::mt19937_64 rng(55);
  auto ds = test::random_dataset(rng, 5, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  const vector_t a = (vector_t(2) << 1.0, -0.6).finished();
  double prev = -kInf;
  for (double t1 : {0.0, 0.01, 0.05, 0.1, 0.3}) {
    AmbiguitySpec s;
    s.theta1 = t1;
    s.theta2 = 0.05;
    const double v = single(a, 0, ds, sp, s, {}, &test::highs());
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
  prev = -kInf;
  for (double t2 : {0.0, 0.01, 0.05, 0.1, 0.5}) {
    AmbiguitySpec s;
    s.theta1 = 0.1;
    s.theta2 = t2;
    const double v = single(a, 0, ds, sp, s, {}, &test::highs());
    CHECK(v >= prev - 1e-9);
    prev = v;
  }
}

TEST_CASE("CVaR constraint at radius zero recovers the sample CVaR") {
  // min c s.t. CVaR_eps(xi - c) <= 0, so c = mean of the worst eps N samples
  const vector_t s = (vector_t(10) << 0.1, -0.3, 0.25, 0.05, -0.1, 0.4, 0.0, -0.2, 0.3, 0.15).finished();
  auto ds = test::dataset_from(s);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  for (double eps : {0.1, 0.2, 0.5}) {
    lp::ModelBuilder m;
    auto c = m.add_var(-kInf, kInf);
    AffineUncertainExpression e;
    e.a = {LinExpr(1.0)};
    e.b = LinExpr(c, -1.0);
    AmbiguitySpec spec;
    auto h = cvar_drcc({{e}, eps}, ds, sp, spec, m);
    m.set_objective(LinExpr(c), lp::ObjSense::minimize);
    auto r = lp::solve(m, test::simplex());
    REQUIRE(r.optimal());
    std::vector<double> v(s.data(), s.data() + s.size());
    std::sort(v.rbegin(), v.rend());
    const auto k = static_cast<std::size_t>(eps * 10 + 0.5);
    double top = 0;
    for (std::size_t j = 0; j < k; ++j) top += v[j];
    CHECK(r.value(c) == doctest::Approx(top / static_cast<double>(k)).epsilon(1e-9));
    CHECK(r.value(h.tau) <= 0.0 + 1e-9);
  }
}

TEST_CASE("CVaR constraint rejects epsilon outside (0,1)") {
  std::mt19937_64 rng(1);
  auto ds = test::random_dataset(rng, 3, 1);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  lp::ModelBuilder m;
  CHECK_THROWS_AS(cvar_drcc({{AffineUncertainExpression::fixed(vector_t::Ones(1), 0)}, 0.0}, ds, sp, {}, m),
                  InvalidArgument);
}

TEST_CASE("dualized inner max equals the inner optimum") {
  // inner: max c^T w over 0 <= w <= 1, w1 + w2 <= 1.5
  lp::ModelBuilder inner;
  auto w1 = inner.add_var(0, 1), w2 = inner.add_var(0, 1);
  inner.add_row(LinExpr(w1) + LinExpr(w2), lp::Sense::le, 1.5);
  lp::ModelBuilder outer;
  auto d = dualize_inner_max(outer, inner, {LinExpr(2.0), LinExpr(1.0)});
  outer.set_objective(d.value, lp::ObjSense::minimize);
  auto r = lp::solve(outer, test::simplex());
  REQUIRE(r.optimal());
  CHECK(r.objective_value == doctest::Approx(2.5));
}

TEST_CASE("relaxation diagnostics report graph points") {
  std::mt19937_64 rng(88);
  auto ds = test::random_dataset(rng, 4, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec spec;
  spec.theta1 = 0.1;
  spec.theta2 = 0.05;
  lp::ModelBuilder m;
  WceContext ctx(m, ds, sp, spec);
  auto blk = ctx.add_block({AffineUncertainExpression::fixed((vector_t(2) << 1.0, 1.0).finished(), 0)});
  m.set_objective(blk.objective_contribution, lp::ObjSense::minimize);
  auto r = lp::solve(m, test::highs());
  REQUIRE(r.optimal());
  auto diag = diagnose_relaxation(blk, *ctx.relaxation(), r);
  CHECK(diag.max_graph_gap >= 0.0);
  CHECK(diag.points.size() == diag.coordinate.size());
  CHECK(diag.integral == (diag.max_graph_gap <= 1e-9));
}

TEST_CASE("zero exposure gives the constant for any radii") {
  std::mt19937_64 rng(9);
  auto ds = test::random_dataset(rng, 4, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  for (double t1 : {0.0, 0.1, 1.0}) {
    AmbiguitySpec s;
    s.theta1 = t1;
    CHECK(single(vector_t::Zero(2), 0.37, ds, sp, s) == doctest::Approx(0.37));
    s.theta2 = 0.05;
    CHECK(single(vector_t::Zero(2), 0.37, ds, sp, s, {}, &test::highs()) == doctest::Approx(0.37));
  }
}

TEST_CASE("both radii collapsed: theta1 = 0 and theta2 >= |W|") {
  std::mt19937_64 rng(10);
  auto ds = test::random_dataset(rng, 5, 2);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  const vector_t a = (vector_t(2) << 0.4, -1.1).finished();
  AmbiguitySpec s;
  s.theta1 = 0.0;
  s.theta2 = 2.0;
  CHECK(single(a, 0.2, ds, sp, s, {}, &test::highs()) ==
        doctest::Approx(0.2 + (ds.deviations * a).mean()).epsilon(1e-7));
}

TEST_CASE("two samples, one farm: copula block against the oracle") {
  const auto ds = test::dataset_from((matrix_t(2, 1) << -0.15, 0.2).finished());
  const auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec spec;
  spec.theta1 = 0.1;
  spec.theta2 = 0.05;
  auto bv = block_value({AffineUncertainExpression::fixed(vector_t::Ones(1), 0.0)}, ds, sp, spec, {}, test::simplex());
  OracleOptions o;
  o.grid_points_per_dim = 15;
  auto oracle = oracle_worst_case_expectation(vector_t::Ones(1), 0.0, ds, sp, spec, o, test::simplex());
  REQUIRE(oracle.feasible());
  CHECK(bv.value >= oracle.value - 1e-6);
  auto diag = diagnose_relaxation(bv.block, make_copula_relaxation(ds, sp, bv.block.vbar), bv.result);
  if (diag.integral) CHECK(bv.value <= oracle.value + 1e-5);
}

TEST_CASE("CVaR of a constant negative loss is feasible") {
  std::mt19937_64 rng(3);
  auto ds = test::random_dataset(rng, 5, 1);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  lp::ModelBuilder m;
  AmbiguitySpec spec;
  spec.theta1 = 0.2;
  auto h = cvar_drcc({{AffineUncertainExpression::fixed(vector_t::Zero(1), -1.0)}, 0.1}, ds, sp, spec, m);
  m.set_objective(LinExpr(h.tau), lp::ObjSense::maximize);
  auto r = lp::solve(m, test::simplex());
  REQUIRE(r.optimal());
  // tau + (1/eps) E[max(-1 - tau, 0)] <= 0 holds for every tau in [-1, 0]
  CHECK(r.value(h.tau) == doctest::Approx(0.0).scale(1));
  m.set_objective(LinExpr(h.tau), lp::ObjSense::minimize);
  auto lo = lp::solve(m, test::simplex());
  REQUIRE(lo.optimal());
  CHECK(lo.value(h.tau) <= -1.0 + 1e-9);
}

TEST_CASE("CVaR with every sample below the threshold is feasible at zero radii") {
  const auto ds = test::dataset_from((matrix_t(4, 1) << -0.3, -0.2, 0.0, 0.1).finished());
  const auto sp = SupportPolytope::for_forecast(ds.forecast);
  for (double eps : {0.01, 0.2, 0.9}) {
    lp::ModelBuilder m;
    AffineUncertainExpression e;
    e.a = {LinExpr(1.0)};
    e.b = LinExpr(-0.15);  // c - delta = 0.1 with c = 0.15
    AmbiguitySpec spec;
    spec.theta2 = 0.0;
    cvar_drcc({{e}, eps}, ds, sp, spec, m);
    m.set_objective(LinExpr(0.0), lp::ObjSense::minimize);
    CHECK(lp::solve(m, test::highs()).optimal());
  }
}

namespace {

/** Worst-case CVaR of xi by the grid oracle: min over tau of tau + E_wc[max(xi - tau, 0)] / eps */
double oracle_cvar(const UncertaintyDataset& ds, const SupportPolytope& sp, const AmbiguitySpec& spec, double eps) {
  OracleOptions o;
  o.grid_points_per_dim = 15;
  auto f = [&](double tau) {
    auto r = oracle_worst_case_expectation({{vector_t::Ones(1), -tau}, {vector_t::Zero(1), 0.0}}, ds, sp, spec, o,
                                           test::simplex());
    REQUIRE(r.feasible());
    return tau + r.value / eps;
  };
  double lo = sp.xi_min(0), hi = sp.xi_max(0);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 60; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (f(x1) <= f(x2)) hi = x2;
    else lo = x1;
  }
  return f(0.5 * (lo + hi));
}

/** Smallest c with CVaR(xi - c) <= 0 in the reformulated model, by bisection on feasibility */
double model_cvar_boundary(const UncertaintyDataset& ds, const SupportPolytope& sp, const AmbiguitySpec& spec,
                           double eps) {
  auto feasible = [&](double c) {
    lp::ModelBuilder m;
    AffineUncertainExpression e;
    e.a = {LinExpr(1.0)};
    e.b = LinExpr(-c);
    cvar_drcc({{e}, eps}, ds, sp, spec, m);
    m.set_objective(LinExpr(0.0), lp::ObjSense::minimize);
    return lp::solve(m, test::highs()).optimal();
  };
  double lo = sp.xi_min(0) - 1, hi = sp.xi_max(0) + 1;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("one-farm CVaR boundary against the oracle") {
  const auto ds = test::dataset_from((matrix_t(4, 1) << -0.3, -0.05, 0.1, 0.22).finished());
  const auto sp = SupportPolytope::for_forecast(ds.forecast);
  AmbiguitySpec m1;
  m1.theta1 = 0.02;
  CHECK(model_cvar_boundary(ds, sp, m1, 0.05) == doctest::Approx(oracle_cvar(ds, sp, m1, 0.05)).epsilon(1e-4));
  AmbiguitySpec m2 = m1;
  m2.theta2 = 0.1;
  CHECK(model_cvar_boundary(ds, sp, m2, 0.05) >= oracle_cvar(ds, sp, m2, 0.05) - 1e-4);
}

TEST_CASE("McCormick gap at random interior points") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    const Bounds xb{-u(rng), u(rng)}, yb{0.0, 0.5 + u(rng)};
    const double x = xb.lo + u(rng) * (xb.hi - xb.lo), y = yb.lo + u(rng) * (yb.hi - yb.lo);
    lp::ModelBuilder m;
    auto vx = m.add_var(x, x), vy = m.add_var(y, y);
    auto w = mccormick_envelope(m, vx, vy, xb, yb);
    const double cap = (xb.hi - xb.lo) * (yb.hi - yb.lo) / 4;
    for (auto sense : {lp::ObjSense::minimize, lp::ObjSense::maximize}) {
      m.set_objective(LinExpr(w), sense);
      auto r = lp::solve(m, test::simplex());
      REQUIRE(r.optimal());
      CHECK(std::fabs(r.value(w) - x * y) <= cap + 1e-12);
      if (sense == lp::ObjSense::minimize) CHECK(r.value(w) <= x * y + 1e-12);
      else CHECK(r.value(w) >= x * y - 1e-12);
    }
  }
}

TEST_CASE("copula-only paths reject a missing copula radius") {
  std::mt19937_64 rng(1);
  auto ds = test::random_dataset(rng, 3, 1);
  auto sp = SupportPolytope::for_forecast(ds.forecast);
  lp::ModelBuilder m;
  AmbiguitySpec s;
  s.theta1 = 0.1;
  CHECK_THROWS_AS(reformulate_wce_m2(AffineUncertainExpression::fixed(vector_t::Ones(1), 0), ds, sp, s, 1.0, m),
                  InvalidArgument);
  CHECK_NOTHROW(reformulate_wce_m1(AffineUncertainExpression::fixed(vector_t::Ones(1), 0), ds, sp, 0.1, m));
}
