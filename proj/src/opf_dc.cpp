#include "cdro/opf_dc.hpp"

#include "cdro/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace cdro {

std::unique_ptr<DcOpfModel> build_dc_opf(const DcNetwork& net, const UncertaintyDataset& ds,
                                         const DcOpfSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(net);
  const auto np = static_cast<index_t>(net.generators.size()), nw = static_cast<index_t>(net.wind.size()),
             nf = static_cast<index_t>(net.lines.size());
  if (ds.dim() != nw)
    throw DimensionError("dataset has " + std::to_string(ds.dim()) + " columns but the network has " +
                         std::to_string(nw) + " wind farms");
  for (double e : {settings.eps_up, settings.eps_dn, settings.eps_line})
    if (!(e > 0.0 && e < 1.0)) throw InvalidArgument("DRCC epsilon must lie in (0, 1)");

  auto m = std::make_unique<DcOpfModel>();
  m->net = net;
  m->ds = ds;
  m->support = SupportPolytope::for_forecast(ds.forecast);
  m->settings = settings;
  auto& model = m->model;
  m->wce = std::make_unique<WceContext>(model, m->ds, m->support, settings.spec, settings.wce);

  const vector_t wcap = net.wind_capacity(), d = net.demand();
  const vector_t& mu = m->ds.forecast;
  for (index_t p = 0; p < np; ++p) {
    const auto& gen = net.generators[static_cast<std::size_t>(p)];
    m->g.push_back(model.add_var(gen.gmin, gen.gmax, "g_" + gen.name));
    m->r_up.push_back(model.add_var(0.0, gen.rmax, "rup_" + gen.name));
    m->r_dn.push_back(model.add_var(0.0, gen.rmax, "rdn_" + gen.name));
    m->V.push_back(model.add_vars(nw, -kInf, kInf, "V_" + gen.name));
    model.add_row(lp::LinExpr(m->g.back()) + lp::LinExpr(m->r_up.back()), lp::Sense::le, gen.gmax, "cap_up");
    model.add_row(lp::LinExpr(m->g.back()) - lp::LinExpr(m->r_dn.back()), lp::Sense::ge, gen.gmin, "cap_dn");
    m->day_ahead_cost.add(m->g.back(), gen.cost);
    m->day_ahead_cost.add(m->r_up.back(), gen.cost_up);
    m->day_ahead_cost.add(m->r_dn.back(), gen.cost_dn);
  }
  lp::LinExpr balance;
  for (const auto& g : m->g) balance.add(g, 1.0);
  model.add_row(balance, lp::Sense::eq, d.sum() - wcap.dot(mu), "da_balance");
  for (index_t w = 0; w < nw; ++w) {
    lp::LinExpr part;
    for (index_t p = 0; p < np; ++p) part.add(m->V[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)], 1.0);
    model.add_row(part, lp::Sense::eq, -wcap(w), "rt_balance");
  }

  // recourse cost c^T V xi
  AffineUncertainExpression cost;
  for (index_t w = 0; w < nw; ++w) {
    lp::LinExpr a;
    for (index_t p = 0; p < np; ++p)
      a.add(m->V[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)], net.generators[static_cast<std::size_t>(p)].cost);
    cost.a.push_back(std::move(a));
  }
  m->recourse = m->wce->add_block({cost});

  for (index_t p = 0; p < np; ++p) {
    AffineUncertainExpression up, dn;
    for (index_t w = 0; w < nw; ++w) {
      const auto v = m->V[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)];
      up.a.emplace_back(v, 1.0);
      dn.a.emplace_back(v, -1.0);
    }
    up.b = -lp::LinExpr(m->r_up[static_cast<std::size_t>(p)]);
    dn.b = -lp::LinExpr(m->r_dn[static_cast<std::size_t>(p)]);
    m->drcc_up.push_back(m->wce->add_drcc({{up}, settings.eps_up}));
    m->drcc_dn.push_back(m->wce->add_drcc({{dn}, settings.eps_dn}));
  }

  for (index_t f = 0; f < nf; ++f) {
    AffineUncertainExpression flow;
    for (index_t w = 0; w < nw; ++w) {
      lp::LinExpr a(net.ptdf_wind(f, w) * wcap(w));
      for (index_t p = 0; p < np; ++p)
        a.add(m->V[static_cast<std::size_t>(p)][static_cast<std::size_t>(w)], net.ptdf_gen(f, p));
      flow.a.push_back(std::move(a));
    }
    for (index_t p = 0; p < np; ++p) flow.b.add(m->g[static_cast<std::size_t>(p)], net.ptdf_gen(f, p));
    flow.b.add_constant(net.ptdf_wind.row(f).dot(wcap.cwiseProduct(mu)) - net.ptdf_load.row(f).dot(d));
    const double fmax = net.lines[static_cast<std::size_t>(f)].fmax;

    AffineUncertainExpression upper = flow;
    upper.b.add_constant(-fmax);
    m->drcc_line_up.push_back(m->wce->add_drcc({{upper}, settings.eps_line}));
    if (settings.line_lower_drcc) {
      AffineUncertainExpression lower;
      for (const auto& a : flow.a) lower.a.push_back(-a);
      lower.b = -flow.b;
      lower.b.add_constant(-fmax);
      m->drcc_line_dn.push_back(m->wce->add_drcc({{lower}, settings.eps_line}));
    }
  }
  model.set_objective(m->day_ahead_cost + m->recourse.objective_contribution, lp::ObjSense::minimize);
  m->build_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

DayAheadSolution solve_day_ahead(DcOpfModel& m, const lp::LpBackend& backend, const lp::SolveOptions& options) {
  DayAheadSolution sol;
  sol.build_time = m.build_time;
  auto res = lp::solve(m.model, backend, options);
  sol.status = res.status;
  sol.wall_time = res.wall_time;
  sol.rounds = res.rounds;
  sol.message = res.message;
  if (!res.optimal()) return sol;
  const auto np = static_cast<index_t>(m.g.size()), nw = m.ds.dim();
  sol.g.resize(np);
  sol.r_up.resize(np);
  sol.r_dn.resize(np);
  sol.V.resize(np, nw);
  for (index_t p = 0; p < np; ++p) {
    const auto pu = static_cast<std::size_t>(p);
    sol.g(p) = res.value(m.g[pu]);
    sol.r_up(p) = res.value(m.r_up[pu]);
    sol.r_dn(p) = res.value(m.r_dn[pu]);
    for (index_t w = 0; w < nw; ++w) sol.V(p, w) = res.value(m.V[pu][static_cast<std::size_t>(w)]);
  }
  sol.objective = res.objective_value;
  sol.day_ahead_cost = res.value(m.day_ahead_cost);
  sol.recourse_cost = res.value(m.recourse.objective_contribution);
  return sol;
}

double DcResiduals::max() const { return std::max({gen_bounds, reserve_bounds, day_ahead_balance, participation}); }

DcResiduals dc_residuals(const DcNetwork& net, const UncertaintyDataset& ds, const DayAheadSolution& sol) {
  if (!sol.optimal()) throw InvalidArgument("residuals need an optimal day-ahead solution");
  DcResiduals r;
  const vector_t wcap = net.wind_capacity();
  for (std::size_t p = 0; p < net.generators.size(); ++p) {
    const auto& gen = net.generators[p];
    const auto i = static_cast<index_t>(p);
    r.gen_bounds = std::max({r.gen_bounds, sol.g(i) + sol.r_up(i) - gen.gmax, gen.gmin - (sol.g(i) - sol.r_dn(i))});
    r.reserve_bounds = std::max({r.reserve_bounds, -sol.r_up(i), -sol.r_dn(i), sol.r_up(i) - gen.rmax,
                                 sol.r_dn(i) - gen.rmax});
  }
  r.day_ahead_balance = std::fabs(sol.g.sum() + wcap.dot(ds.forecast) - net.demand().sum());
  for (index_t w = 0; w < wcap.size(); ++w)
    r.participation = std::max(r.participation, std::fabs(sol.V.col(w).sum() + wcap(w)));
  return r;
}

double dc_scenario_violation(const DcNetwork& net, const UncertaintyDataset& ds, const DayAheadSolution& sol,
                             const matrix_t& points) {
  const vector_t wcap = net.wind_capacity(), d = net.demand();
  double worst = 0.0;
  for (index_t i = 0; i < points.rows(); ++i) {
    const vector_t xi = points.row(i).transpose();
    const vector_t resp = sol.V * xi;
    worst = std::max({worst, (resp - sol.r_up).maxCoeff(), (-resp - sol.r_dn).maxCoeff()});
    const vector_t flow = net.ptdf_gen * (sol.g + resp) + net.ptdf_wind * wcap.cwiseProduct(ds.forecast + xi) -
                          net.ptdf_load * d;
    for (index_t f = 0; f < flow.size(); ++f)
      worst = std::max(worst, std::fabs(flow(f)) - net.lines[static_cast<std::size_t>(f)].fmax);
  }
  return worst;
}

}  // namespace cdro
