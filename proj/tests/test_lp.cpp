#include "cdro/errors.hpp"
#include "cdro/lp/model.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace cdro;
using namespace cdro::lp;

namespace {

std::vector<const LpBackend*> backends() {
  std::vector<const LpBackend*> out{&test::simplex()};
  for (const auto& n : available_backends())
    if (n == "highs") out.push_back(&test::highs());
  return out;
}

}  // namespace

TEST_CASE("textbook LP: max 3x + 5y") {
  for (const auto* b : backends()) {
    CAPTURE(b->name());
    ModelBuilder m;
    auto x = m.add_var(0, kInf, "x");
    auto y = m.add_var(0, kInf, "y");
    auto r1 = m.add_row(LinExpr(x), Sense::le, 4);
    auto r2 = m.add_row(2 * LinExpr(y), Sense::le, 12);
    auto r3 = m.add_row(3 * LinExpr(x) + 2 * LinExpr(y), Sense::le, 18);
    m.set_objective(3 * LinExpr(x) + 5 * LinExpr(y), ObjSense::maximize);
    auto res = solve(m, *b);
    REQUIRE(res.optimal());
    CHECK(res.objective_value == doctest::Approx(36).epsilon(1e-9));
    CHECK(res.value(x) == doctest::Approx(2));
    CHECK(res.value(y) == doctest::Approx(6));
    // shadow prices d obj / d rhs
    CHECK(res.dual(r1) == doctest::Approx(0).scale(1));
    CHECK(res.dual(r2) == doctest::Approx(1.5));
    CHECK(res.dual(r3) == doctest::Approx(1.0));
  }
}

TEST_CASE("infeasible and unbounded are reported") {
  for (const auto* b : backends()) {
    CAPTURE(b->name());
    ModelBuilder inf;
    auto x = inf.add_var(0, 1);
    inf.add_row(LinExpr(x), Sense::ge, 2);
    inf.set_objective(LinExpr(x), ObjSense::minimize);
    CHECK(solve(inf, *b).status == SolveStatus::infeasible);

    ModelBuilder unb;
    auto y = unb.add_var(0, kInf);
    unb.add_row(LinExpr(y), Sense::ge, 1);
    unb.set_objective(LinExpr(y), ObjSense::maximize);
    CHECK(solve(unb, *b).status == SolveStatus::unbounded);
  }
}

TEST_CASE("free variables, equalities and objective constants") {
  for (const auto* b : backends()) {
    CAPTURE(b->name());
    ModelBuilder m;
    auto x = m.add_var(-kInf, kInf);
    auto y = m.add_var(-3, 3);
    m.add_row(LinExpr(x) + LinExpr(y), Sense::eq, 1);
    m.add_row(LinExpr(x) - LinExpr(y), Sense::ge, -10);
    m.set_objective(LinExpr(x) + 7.0, ObjSense::minimize);
    auto res = solve(m, *b);
    REQUIRE(res.optimal());
    CHECK(res.value(x) == doctest::Approx(-2));
    CHECK(res.objective_value == doctest::Approx(5));
  }
}

TEST_CASE("LinExpr constants move to the right-hand side") {
  ModelBuilder m;
  auto x = m.add_var(0, 10);
  m.add_row(LinExpr(x) + 2.0, Sense::le, LinExpr(5.0));
  CHECK(m.row_rhs(0) == doctest::Approx(3));
  LinExpr e = LinExpr(x, 2.0) + LinExpr(x, -2.0);
  e.compress();
  CHECK(e.is_constant());
}

TEST_CASE("invalid handles are rejected") {
  ModelBuilder a, b;
  a.add_var(0, 1);
  auto y = b.add_var(0, 1);
  auto z = b.add_var(0, 1);
  CHECK_THROWS(a.add_row(LinExpr(z), Sense::le, 1));
  CHECK_NOTHROW(a.add_row(LinExpr(y), Sense::le, 1));
  CHECK_THROWS_AS(make_backend("nonsense"), ConfigError);
}

TEST_CASE("dense simplex and HiGHS agree on primal value and row duals") {
  bool have_highs = false;
  for (const auto& n : available_backends()) have_highs |= n == "highs";
  if (!have_highs) return;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  int compared = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 6, m = 8;
    ModelBuilder mb;
    auto x = mb.add_vars(n, -5, 5);
    std::vector<Row> rows;
    for (int r = 0; r < m; ++r) {
      LinExpr e;
      for (int j = 0; j < n; ++j) e.add(x[static_cast<std::size_t>(j)], u(rng));
      const Sense s = r % 3 == 0 ? Sense::ge : Sense::le;
      rows.push_back(mb.add_row(e, s, s == Sense::ge ? -1 - u(rng) * u(rng) : 1 + u(rng) * u(rng)));
    }
    LinExpr obj;
    for (int j = 0; j < n; ++j) obj.add(x[static_cast<std::size_t>(j)], u(rng));
    mb.set_objective(obj, rep % 2 ? ObjSense::maximize : ObjSense::minimize);
    auto a = solve(mb, test::simplex());
    auto h = solve(mb, test::highs());
    REQUIRE(a.status == h.status);
    if (!a.optimal()) continue;
    ++compared;
    CHECK(a.objective_value == doctest::Approx(h.objective_value).epsilon(1e-8));
    // duals are unique for nondegenerate random data; compare through the Lagrangian bound
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const bool sign_ok = mb.row_sense(rows[r].id) == Sense::le
                               ? (mb.objective_sense() == ObjSense::minimize ? a.dual(rows[r]) <= 1e-9
                                                                             : a.dual(rows[r]) >= -1e-9)
                               : (mb.objective_sense() == ObjSense::minimize ? a.dual(rows[r]) >= -1e-9
                                                                             : a.dual(rows[r]) <= 1e-9);
      CHECK(sign_ok);
      CHECK(a.dual(rows[r]) == doctest::Approx(h.dual(rows[r])).epsilon(1e-6).scale(1));
    }
  }
  CHECK(compared > 30);
}

namespace {

/** Cuts x + y <= k for the box corners, one per round */
class CornerCuts final : public RowGenerator {
 public:
  CornerCuts(Var x, Var y) : x_(x), y_(y) {}
  std::size_t separate(const vector_t& p, ModelBuilder& m) override {
    if (p(x_.id) + p(y_.id) > 1.0 + 1e-9) {
      m.add_row(LinExpr(x_) + LinExpr(y_), Sense::le, 1.0);
      ++added;
      return 1;
    }
    return 0;
  }
  int added = 0;

 private:
  Var x_, y_;
};

}  // namespace

TEST_CASE("lazy rows are appended until the generator accepts") {
  for (const auto* b : backends()) {
    CAPTURE(b->name());
    ModelBuilder m;
    auto x = m.add_var(0, 1);
    auto y = m.add_var(0, 1);
    m.set_objective(LinExpr(x) + 2 * LinExpr(y), ObjSense::maximize);
    auto gen = std::make_shared<CornerCuts>(x, y);
    m.add_lazy(gen);
    auto res = solve(m, *b);
    REQUIRE(res.optimal());
    CHECK(res.objective_value == doctest::Approx(2));
    CHECK(res.rounds == 2);
    CHECK(gen->added == 1);
  }
}

TEST_CASE("LP dump is deterministic") {
  auto make = [] {
    ModelBuilder m;
    auto x = m.add_var(0, 1, "x");
    auto y = m.add_var(-kInf, kInf, "y");
    m.add_row(LinExpr(x) - LinExpr(y), Sense::le, 0.5, "r");
    m.set_objective(LinExpr(x), ObjSense::minimize);
    std::ostringstream os;
    m.write_lp(os);
    return os.str();
  };
  CHECK(make() == make());
  CHECK(make().find("r#0:") != std::string::npos);
}

TEST_CASE("one-variable cases") {
  for (const auto* b : backends()) {
    ModelBuilder m;
    auto x = m.add_var(-kInf, kInf);
    m.add_row(LinExpr(x), Sense::ge, 3);
    m.set_objective(LinExpr(x), ObjSense::minimize);
    auto r = solve(m, *b);
    REQUIRE(r.optimal());
    CHECK(r.objective_value == doctest::Approx(3));
    m.add_row(LinExpr(x), Sense::le, 2);
    CHECK(solve(m, *b).status == SolveStatus::infeasible);
  }
}

namespace {

/** Brute-force LP oracle for min c^T x over {A x <= b}, x in R^2: every pair of active rows */
double vertex_enumeration(const matrix_t& A, const vector_t& b, const vector_t& c) {
  double best = kInf;
  for (index_t i = 0; i < A.rows(); ++i)
    for (index_t j = i + 1; j < A.rows(); ++j) {
      Eigen::Matrix2d M;
      M << A(i, 0), A(i, 1), A(j, 0), A(j, 1);
      if (std::fabs(M.determinant()) < 1e-12) continue;
      const Eigen::Vector2d x = M.partialPivLu().solve(Eigen::Vector2d(b(i), b(j)));
      if (((A * x).array() <= b.array() + 1e-9).all()) best = std::min(best, c.dot(x));
    }
  return best;
}

}  // namespace

TEST_CASE("random bounded polygons against vertex enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 5 + rep % 6;
    matrix_t A(m + 4, 2);
    vector_t b(m + 4);
    for (int r = 0; r < m; ++r) {
      A(r, 0) = u(rng), A(r, 1) = u(rng);
      b(r) = 0.2 + std::fabs(u(rng));  // origin stays feasible
    }
    A.bottomRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
    b.tail(4).setConstant(3.0);
    const vector_t c = (vector_t(2) << u(rng), u(rng)).finished();
    for (const auto* be : backends()) {
      ModelBuilder mb;
      auto x = mb.add_var(-kInf, kInf), y = mb.add_var(-kInf, kInf);
      for (int r = 0; r < m + 4; ++r) mb.add_row(LinExpr(x, A(r, 0)) + LinExpr(y, A(r, 1)), Sense::le, b(r));
      mb.set_objective(LinExpr(x, c(0)) + LinExpr(y, c(1)), ObjSense::minimize);
      auto res = solve(mb, *be);
      REQUIRE(res.optimal());
      CHECK(std::fabs(res.objective_value - vertex_enumeration(A, b, c)) <= 1e-7);
    }
  }
}

TEST_CASE("re-solving is deterministic and slack rows do not move the optimum") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto* be : backends()) {
    ModelBuilder mb;
    auto x = mb.add_vars(4, -2, 2);
    for (int r = 0; r < 6; ++r) {
      LinExpr e;
      for (auto v : x) e.add(v, u(rng));
      mb.add_row(e, Sense::le, 1.0);
    }
    LinExpr obj;
    for (auto v : x) obj.add(v, u(rng));
    mb.set_objective(obj, ObjSense::minimize);
    auto a = solve(mb, *be), b = solve(mb, *be);
    REQUIRE(a.optimal());
    CHECK(a.status == b.status);
    CHECK(std::fabs(a.objective_value - b.objective_value) <= 1e-9);
    LinExpr loose;
    for (auto v : x) loose.add(v, 1.0);
    mb.add_row(loose, Sense::le, 100.0);
    CHECK(std::fabs(solve(mb, *be).objective_value - a.objective_value) <= 1e-7);
  }
}
