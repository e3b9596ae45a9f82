#include "cdro/wce.hpp"

#include "cdro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cdro {

const char* to_string(CopulaForm f) { return f == CopulaForm::projected ? "projected" : "full_dual"; }

CopulaForm parse_copula_form(const std::string& s) {
  if (s == "projected") return CopulaForm::projected;
  if (s == "full_dual") return CopulaForm::full_dual;
  throw ConfigError("unknown copula form '" + s + "' (expected projected or full_dual)");
}

lp::Var mccormick_envelope(lp::ModelBuilder& model, lp::Var x, lp::Var y, Bounds xb, Bounds yb) {
  for (double v : {xb.lo, xb.hi, yb.lo, yb.hi})
    if (!std::isfinite(v)) throw InvalidArgument("McCormick envelope needs finite bounds on both factors");
  if (xb.lo > xb.hi || yb.lo > yb.hi) throw InvalidArgument("McCormick envelope bounds have lo > hi");
  auto w = model.add_var(-kInf, kInf);
  using lp::LinExpr;
  using lp::Sense;
  model.add_row(LinExpr(w) - xb.lo * LinExpr(y) - yb.lo * LinExpr(x), Sense::ge, -xb.lo * yb.lo);
  model.add_row(LinExpr(w) - xb.hi * LinExpr(y) - yb.hi * LinExpr(x), Sense::ge, -xb.hi * yb.hi);
  model.add_row(LinExpr(w) - xb.hi * LinExpr(y) - yb.lo * LinExpr(x), Sense::le, -xb.hi * yb.lo);
  model.add_row(LinExpr(w) - xb.lo * LinExpr(y) - yb.hi * LinExpr(x), Sense::le, -xb.lo * yb.hi);
  return w;
}

InnerDual dualize_inner_max(lp::ModelBuilder& outer, const lp::ModelBuilder& inner,
                            const std::vector<lp::LinExpr>& inner_objective) {
  const index_t n = inner.num_vars();
  if (static_cast<index_t>(inner_objective.size()) != n)
    throw DimensionError("inner objective has " + std::to_string(inner_objective.size()) + " entries for " +
                         std::to_string(n) + " inner variables");
  InnerDual out;
  std::vector<lp::LinExpr> stat(static_cast<std::size_t>(n));
  // G w <= h with mu >= 0, E w = e with nu free; stationarity G^T mu + E^T nu = c
  for (index_t r = 0; r < inner.num_rows(); ++r) {
    const auto sense = inner.row_sense(r);
    const double sign = sense == lp::Sense::ge ? -1.0 : 1.0;
    auto mu = outer.add_var(sense == lp::Sense::eq ? -kInf : 0.0, kInf);
    out.multipliers.push_back(mu);
    for (index_t e = inner.row_begin(r); e < inner.row_end(r); ++e)
      stat[static_cast<std::size_t>(inner.entry_col(e))].add(mu, sign * inner.entry_val(e));
    out.value.add(mu, sign * inner.row_rhs(r));
  }
  for (index_t j = 0; j < n; ++j) {
    if (std::isfinite(inner.upper(j))) {
      auto mu = outer.add_var(0.0, kInf);
      out.multipliers.push_back(mu);
      stat[static_cast<std::size_t>(j)].add(mu, 1.0);
      out.value.add(mu, inner.upper(j));
    }
    if (std::isfinite(inner.lower(j))) {
      auto mu = outer.add_var(0.0, kInf);
      out.multipliers.push_back(mu);
      stat[static_cast<std::size_t>(j)].add(mu, -1.0);
      out.value.add(mu, -inner.lower(j));
    }
  }
  for (index_t j = 0; j < n; ++j)
    outer.add_row(stat[static_cast<std::size_t>(j)] - inner_objective[static_cast<std::size_t>(j)], lp::Sense::eq, 0.0);
  return out;
}

namespace {

// s >= (dir_xi) xi_m + zeta2 Z_m at hull vertex m
lp::Row emit_vertex_row(lp::ModelBuilder& model, const CopulaFiber& fiber, const lp::LinExpr& dir_xi, lp::Var zeta2,
                        lp::Var s, index_t m) {
  const point2_t& v = fiber.hull[static_cast<std::size_t>(m)];
  lp::LinExpr lhs(s);
  lhs.add(dir_xi, -v.x());
  lhs.add(zeta2, -v.y());
  return model.add_row(lhs, lp::Sense::ge, 0.0);
}

double cross(const point2_t& o, const point2_t& a, const point2_t& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Extreme vertices plus a fan triangle containing p; all vertices when p is not located.
std::vector<index_t> seed_vertices(const CopulaFiber& fiber, const point2_t& p) {
  const auto& h = fiber.hull;
  const index_t m = static_cast<index_t>(h.size());
  std::vector<index_t> out;
  if (m < 3) {
    for (index_t j = 0; j < m; ++j) out.push_back(j);
    return out;
  }
  for (const auto& d : {point2_t(-1, 0), point2_t(1, 0), point2_t(0, -1), point2_t(0, 1)})
    out.push_back(fiber.support_vertex(d));
  const double eps = 1e-12;
  bool found = false;
  for (index_t j = 1; j + 1 < m && !found; ++j) {
    const auto &a = h[0], &b = h[static_cast<std::size_t>(j)], &c = h[static_cast<std::size_t>(j + 1)];
    if (cross(a, b, p) >= -eps && cross(b, c, p) >= -eps && cross(c, a, p) >= -eps) {
      out.insert(out.end(), {0, j, j + 1});
      found = true;
    }
  }
  if (!found)
    for (index_t j = 0; j < m; ++j) out.push_back(j);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

class VertexCutGenerator final : public lp::RowGenerator {
 public:
  struct Record {
    index_t k;
    lp::LinExpr dir_xi;
    lp::Var zeta2;
    lp::Var s;
    std::vector<char> added;
    std::vector<std::pair<lp::Row, index_t>>* log;
  };

  explicit VertexCutGenerator(std::shared_ptr<const CopulaRelaxation> rel) : rel_(std::move(rel)) {}

  Record& track(index_t k, lp::LinExpr dir_xi, lp::Var zeta2, lp::Var s,
                std::vector<std::pair<lp::Row, index_t>>* log) {
    const auto& fiber = rel_->fibers[static_cast<std::size_t>(k)];
    records_.push_back({k, std::move(dir_xi), zeta2, s, std::vector<char>(fiber.hull.size(), 0), log});
    return records_.back();
  }

  void keep(std::shared_ptr<VertexRowLog> log) { logs_.push_back(std::move(log)); }

  void emit(Record& r, index_t m, lp::ModelBuilder& model) {
    if (r.added[static_cast<std::size_t>(m)]) return;
    r.added[static_cast<std::size_t>(m)] = 1;
    const auto& fiber = rel_->fibers[static_cast<std::size_t>(r.k)];
    r.log->emplace_back(emit_vertex_row(model, fiber, r.dir_xi, r.zeta2, r.s, m), m);
  }

  std::size_t separate(const vector_t& x, lp::ModelBuilder& model) override {
    std::size_t added = 0;
    for (auto& r : records_) {
      const auto& fiber = rel_->fibers[static_cast<std::size_t>(r.k)];
      const point2_t dir(r.dir_xi.evaluate(x), x(r.zeta2.id));
      const index_t m = fiber.support_vertex(dir);
      const double best = dir.dot(fiber.hull[static_cast<std::size_t>(m)]);
      if (r.added[static_cast<std::size_t>(m)]) continue;
      if (x(r.s.id) < best - 1e-8 * (1.0 + std::fabs(best))) {
        emit(r, m, model);
        ++added;
      }
    }
    return added;
  }

 private:
  std::shared_ptr<const CopulaRelaxation> rel_;
  std::deque<Record> records_;  // stable addresses
  std::vector<std::shared_ptr<VertexRowLog>> logs_;
};

WceContext::WceContext(lp::ModelBuilder& model, const UncertaintyDataset& ds, const SupportPolytope& sp,
                       const AmbiguitySpec& spec, WceOptions options)
    : model_(model), ds_(ds), sp_(sp), spec_(spec), options_(options) {
  validate(spec_);
  require_valid(ds_, sp_);
  // an infinite copula radius leaves only the metric ball
  if (spec_.theta2 && !std::isfinite(*spec_.theta2)) spec_.theta2.reset();
  if (!spec_.copula()) return;

  bool complete = true;
  double cover = 0.0;
  for (index_t k = 0; k < ds_.dim(); ++k) {
    bool c = true;
    cover = std::max(cover, sigma_cover_bound(ds_.deviations.col(k), sp_.xi_min(k), sp_.xi_max(k), &c));
    complete = complete && c;
  }
  if (options_.sigma_bound) {
    if (!(*options_.sigma_bound > 0.0)) throw InvalidArgument("sigma bound must be positive");
    vbar_ = *options_.sigma_bound;
  } else {
    vbar_ = std::max(10.0 / static_cast<double>(ds_.sample_count()), cover);
  }
  covers_ = complete && vbar_ >= cover;
  rel_ = std::make_shared<const CopulaRelaxation>(make_copula_relaxation(ds_, sp_, vbar_));
  if (options_.form == CopulaForm::full_dual) {
    build_inner_templates();
  } else if (options_.lazy) {
    cuts_ = std::make_shared<VertexCutGenerator>(rel_);
    model_.add_lazy(cuts_);
  }
}

void WceContext::build_inner_templates() {
  const index_t n = ds_.sample_count();
  const double inv_n = 1.0 / static_cast<double>(n);
  inner_.resize(static_cast<std::size_t>(ds_.dim()));
  for (index_t k = 0; k < ds_.dim(); ++k) {
    auto& t = inner_[static_cast<std::size_t>(k)];
    const Bounds xb{sp_.xi_min(k), sp_.xi_max(k)};
    t.xi = t.model.add_var(xb.lo, xb.hi, "xi");
    lp::LinExpr balance;
    for (index_t j = 0; j < n; ++j) {
      const double sj = ds_.deviations(j, k);
      auto z = t.model.add_var(0.0, 1.0, "z");
      auto sigma = t.model.add_var(0.0, vbar_, "sigma");
      auto pi = t.model.add_var(0.0, kInf, "pi");
      auto tz = mccormick_envelope(t.model, z, t.xi, {0.0, 1.0}, xb);
      auto vs = mccormick_envelope(t.model, sigma, t.xi, {0.0, vbar_}, xb);
      // z (xi - s_j) >= 0
      t.model.add_row(lp::LinExpr(tz) - sj * lp::LinExpr(z), lp::Sense::ge, 0.0);
      // 1/N + sigma (xi - s_j) - pi <= 0
      t.model.add_row(lp::LinExpr(vs) - sj * lp::LinExpr(sigma) - lp::LinExpr(pi), lp::Sense::le, -inv_n);
      balance.add(z, inv_n);
      balance.add(pi, -1.0);
      t.z.push_back(z);
    }
    t.model.add_row(balance, lp::Sense::eq, 0.0);
  }
}

lp::LinExpr WceContext::coefficient(PieceHandles& ph, const AffineUncertainExpression& e, index_t k) {
  const auto& a = e.a[static_cast<std::size_t>(k)];
  if (a.terms().size() <= 1) return a;
  auto& proxy = ph.a_proxy[static_cast<std::size_t>(k)];
  if (!proxy.valid()) {
    proxy = model_.add_var(-kInf, kInf);
    model_.add_row(lp::LinExpr(proxy) - a, lp::Sense::eq, 0.0);
  }
  return lp::LinExpr(proxy);
}

void WceContext::add_dual_norm(lp::Var bound, const std::vector<lp::LinExpr>& zeta) {
  if (spec_.ground_norm == GroundNorm::one_norm) {
    for (const auto& z : zeta) {
      model_.add_row(z - lp::LinExpr(bound), lp::Sense::le, 0.0);
      model_.add_row(-z - lp::LinExpr(bound), lp::Sense::le, 0.0);
    }
    return;
  }
  lp::LinExpr total;
  for (const auto& z : zeta) {
    auto u = model_.add_var(0.0, kInf);
    model_.add_row(lp::LinExpr(u) - z, lp::Sense::ge, 0.0);
    model_.add_row(lp::LinExpr(u) + z, lp::Sense::ge, 0.0);
    total.add(u, 1.0);
  }
  model_.add_row(total - lp::LinExpr(bound), lp::Sense::le, 0.0);
}

void WceContext::add_metric_piece(WceBlock& blk, PieceHandles& ph, const AffineUncertainExpression& e) {
  const index_t n = ds_.sample_count(), w = ds_.dim(), rows = sp_.C.rows();
  for (index_t i = 0; i < n; ++i) {
    const auto& y = blk.y[static_cast<std::size_t>(i)];
    if (ph.certain) {
      ph.y_rows.push_back(model_.add_row(lp::LinExpr(y), lp::Sense::ge, e.b));
      continue;
    }
    auto gamma = model_.add_vars(rows, 0.0, kInf);
    const vector_t slack = sp_.D - sp_.C * ds_.deviations.row(i).transpose();
    lp::LinExpr rhs = e.b;
    std::vector<lp::LinExpr> zeta;
    for (index_t k = 0; k < w; ++k) {
      lp::LinExpr ak = coefficient(ph, e, k);
      rhs.add(ak, ds_.deviations(i, k));
      for (index_t r = 0; r < rows; ++r) ak.add(gamma[static_cast<std::size_t>(r)], -sp_.C(r, k));
      zeta.push_back(std::move(ak));
    }
    for (index_t r = 0; r < rows; ++r) rhs.add(gamma[static_cast<std::size_t>(r)], slack(r));
    ph.y_rows.push_back(model_.add_row(lp::LinExpr(y), lp::Sense::ge, rhs));
    add_dual_norm(blk.alpha, zeta);
    ph.gamma.push_back(std::move(gamma));
  }
}

void WceContext::add_projected_piece(WceBlock& blk, PieceHandles& ph, const AffineUncertainExpression& e) {
  const index_t n = ds_.sample_count(), w = ds_.dim();
  const std::size_t piece = blk.pieces.size();
  for (index_t i = 0; i < n; ++i) {
    const auto& y = blk.y[static_cast<std::size_t>(i)];
    if (ph.certain) {
      ph.y_rows.push_back(model_.add_row(lp::LinExpr(y), lp::Sense::ge, e.b));
      continue;
    }
    auto z1 = model_.add_vars(w, -kInf, kInf);
    auto z2 = model_.add_vars(w, -kInf, kInf);
    auto s = model_.add_vars(w, -kInf, kInf);
    lp::LinExpr rhs = e.b;
    std::vector<lp::LinExpr> n1, n2;
    for (index_t k = 0; k < w; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      rhs.add(z1[ku], -ds_.deviations(i, k));
      rhs.add(z2[ku], -rel_->pseudo(i, k));
      rhs.add(s[ku], 1.0);
      n1.emplace_back(z1[ku]);
      n2.emplace_back(z2[ku]);

      const auto& fiber = rel_->fibers[ku];
      lp::LinExpr dir = coefficient(ph, e, k) + lp::LinExpr(z1[ku]);
      auto* log = &blk.vertex_rows->rows[piece][static_cast<std::size_t>(i)][ku];
      if (cuts_) {
        auto& rec = cuts_->track(k, dir, z2[ku], s[ku], log);
        for (index_t m : seed_vertices(fiber, point2_t(ds_.deviations(i, k), rel_->pseudo(i, k))))
          cuts_->emit(rec, m, model_);
      } else {
        for (index_t m = 0; m < static_cast<index_t>(fiber.hull.size()); ++m)
          log->emplace_back(emit_vertex_row(model_, fiber, dir, z2[ku], s[ku], m), m);
      }
    }
    ph.y_rows.push_back(model_.add_row(lp::LinExpr(y), lp::Sense::ge, rhs));
    add_dual_norm(blk.alpha, n1);
    add_dual_norm(*blk.beta, n2);
    ph.zeta1.push_back(std::move(z1));
    ph.zeta2.push_back(std::move(z2));
    ph.s.push_back(std::move(s));
  }
}

void WceContext::add_full_dual_piece(WceBlock& blk, PieceHandles& ph, const AffineUncertainExpression& e) {
  const index_t n = ds_.sample_count(), w = ds_.dim();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (index_t i = 0; i < n; ++i) {
    auto z1 = model_.add_vars(w, -kInf, kInf);
    auto z2 = model_.add_vars(w, -kInf, kInf);
    lp::LinExpr rhs = e.b;
    std::vector<lp::LinExpr> n1, n2;
    std::vector<InnerDual> duals;
    for (index_t k = 0; k < w; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const auto& t = inner_[ku];
      std::vector<lp::LinExpr> c(static_cast<std::size_t>(t.model.num_vars()));
      c[static_cast<std::size_t>(t.xi.id)] = coefficient(ph, e, k) + lp::LinExpr(z1[ku]);
      for (const auto& zj : t.z) c[static_cast<std::size_t>(zj.id)] = lp::LinExpr(z2[ku], inv_n);
      duals.push_back(dualize_inner_max(model_, t.model, c));
      rhs.add(z1[ku], -ds_.deviations(i, k));
      rhs.add(z2[ku], -rel_->pseudo(i, k));
      rhs.add(duals.back().value, 1.0);
      n1.emplace_back(z1[ku]);
      n2.emplace_back(z2[ku]);
    }
    ph.y_rows.push_back(model_.add_row(lp::LinExpr(blk.y[static_cast<std::size_t>(i)]), lp::Sense::ge, rhs));
    add_dual_norm(blk.alpha, n1);
    add_dual_norm(*blk.beta, n2);
    ph.zeta1.push_back(std::move(z1));
    ph.zeta2.push_back(std::move(z2));
    ph.inner.push_back(std::move(duals));
  }
}

WceBlock WceContext::add_block(const std::vector<AffineUncertainExpression>& pieces) {
  if (pieces.empty()) throw InvalidArgument("worst-case expectation block needs at least one piece");
  const index_t n = ds_.sample_count(), w = ds_.dim();
  for (const auto& p : pieces)
    if (p.dim() != w)
      throw DimensionError("expression has " + std::to_string(p.dim()) + " coefficients but the dataset has " +
                           std::to_string(w) + " columns");
  WceBlock blk;
  blk.form = options_.form;
  const bool finite1 = std::isfinite(spec_.theta1);
  blk.alpha = model_.add_var(0.0, finite1 ? kInf : 0.0, "alpha");
  if (finite1) blk.objective_contribution.add(blk.alpha, spec_.theta1);
  if (spec_.copula()) {
    blk.beta = model_.add_var(0.0, kInf, "beta");
    blk.objective_contribution.add(*blk.beta, *spec_.theta2);
    blk.vbar = vbar_;
    if (options_.form == CopulaForm::projected) {
      blk.vertex_rows = std::make_shared<VertexRowLog>();
      blk.vertex_rows->rows.assign(pieces.size(),
                                   std::vector<std::vector<std::vector<std::pair<lp::Row, index_t>>>>(
                                       static_cast<std::size_t>(n),
                                       std::vector<std::vector<std::pair<lp::Row, index_t>>>(static_cast<std::size_t>(w))));
      if (cuts_) cuts_->keep(blk.vertex_rows);
    }
  }
  blk.y = model_.add_vars(n, -kInf, kInf, "y");
  for (const auto& y : blk.y) blk.objective_contribution.add(y, 1.0 / static_cast<double>(n));

  for (const auto& e : pieces) {
    PieceHandles ph;
    ph.certain = e.certain();
    ph.a_proxy.resize(static_cast<std::size_t>(w));
    if (!spec_.copula())
      add_metric_piece(blk, ph, e);
    else if (options_.form == CopulaForm::projected)
      add_projected_piece(blk, ph, e);
    else
      add_full_dual_piece(blk, ph, e);
    blk.pieces.push_back(std::move(ph));
  }
  return blk;
}

DrccHandle WceContext::add_drcc(const DrccSpec& drcc) {
  if (!(drcc.epsilon > 0.0 && drcc.epsilon < 1.0)) throw InvalidArgument("DRCC epsilon must lie in (0, 1)");
  if (drcc.pieces.empty()) throw InvalidArgument("DRCC needs at least one piece");
  DrccHandle h;
  h.tau = model_.add_var(-kInf, kInf, "tau");
  std::vector<AffineUncertainExpression> pieces;
  for (const auto& p : drcc.pieces) {
    AffineUncertainExpression q = p;
    q.b -= lp::LinExpr(h.tau);
    pieces.push_back(std::move(q));
  }
  pieces.push_back(AffineUncertainExpression::fixed(vector_t::Zero(ds_.dim()), 0.0));
  h.block = add_block(pieces);
  h.row = model_.add_row(drcc.epsilon * lp::LinExpr(h.tau) + h.block.objective_contribution, lp::Sense::le, 0.0);
  return h;
}

WceBlock reformulate_wce_m1(const AffineUncertainExpression& expr, const UncertaintyDataset& ds,
                            const SupportPolytope& sp, double theta1, lp::ModelBuilder& model, GroundNorm norm) {
  AmbiguitySpec spec{theta1, std::nullopt, norm};
  WceContext ctx(model, ds, sp, spec);
  return ctx.add_block({expr});
}

WceBlock reformulate_wce_m2(const AffineUncertainExpression& expr, const UncertaintyDataset& ds,
                            const SupportPolytope& sp, const AmbiguitySpec& spec, double vbar,
                            lp::ModelBuilder& model, WceOptions options) {
  if (!spec.copula()) throw InvalidArgument("copula radius absent; use reformulate_wce_m1 for the metric ball");
  if (!(vbar > 0.0)) throw InvalidArgument("sigma bound must be positive");
  options.sigma_bound = vbar;
  WceContext ctx(model, ds, sp, spec, options);
  return ctx.add_block({expr});
}

DrccHandle cvar_drcc(const DrccSpec& drcc, const UncertaintyDataset& ds, const SupportPolytope& sp,
                     const AmbiguitySpec& spec, lp::ModelBuilder& model, WceOptions options) {
  WceContext ctx(model, ds, sp, spec, options);
  return ctx.add_drcc(drcc);
}

RelaxationDiagnostics diagnose_relaxation(const WceBlock& block, const CopulaRelaxation& rel,
                                          const lp::SolveResult& result) {
  if (!block.vertex_rows) throw InvalidArgument("relaxation diagnostics need a projected copula block");
  if (!result.optimal()) throw InvalidArgument("relaxation diagnostics need an optimal solve");
  RelaxationDiagnostics d;
  for (const auto& piece : block.vertex_rows->rows)
    for (const auto& sample : piece)
      for (std::size_t k = 0; k < sample.size(); ++k) {
        const auto& fiber = rel.fibers[k];
        double mass = 0.0;
        point2_t p = point2_t::Zero();
        for (const auto& [row, m] : sample[k]) {
          const double lam = std::fabs(result.dual(row));
          mass += lam;
          p += lam * fiber.hull[static_cast<std::size_t>(m)];
        }
        if (mass <= 1e-9) continue;
        p /= mass;
        const double gap = std::fabs(p.y() - fiber.cdf(p.x()));
        d.max_graph_gap = std::max(d.max_graph_gap, gap);
        d.integral = d.integral && gap <= 1e-9;
        d.points.push_back(p);
        d.coordinate.push_back(static_cast<index_t>(k));
      }
  return d;
}

}  // namespace cdro
