#include "cdro/opf_radial.hpp"

#include "cdro/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numbers>

namespace cdro {

void RadialNetwork::build_topology() {
  const index_t n = size();
  if (n < 1) throw InvalidArgument("feeder needs at least the root node");
  if (static_cast<index_t>(lines.size()) != n - 1)
    throw InvalidArgument("a tree on " + std::to_string(n) + " nodes has " + std::to_string(n - 1) + " lines, got " +
                          std::to_string(lines.size()));
  line_into.assign(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<index_t>> children(static_cast<std::size_t>(n));
  for (index_t l = 0; l < n - 1; ++l) {
    const auto& ln = lines[static_cast<std::size_t>(l)];
    if (ln.from < 0 || ln.from >= n || ln.to < 1 || ln.to >= n)
      throw InvalidArgument("line " + std::to_string(l) + " has endpoints outside the feeder or feeds the root");
    if (line_into[static_cast<std::size_t>(ln.to)] >= 0)
      throw InvalidArgument("node " + std::to_string(ln.to) + " is fed by two lines; not a tree");
    line_into[static_cast<std::size_t>(ln.to)] = l;
    children[static_cast<std::size_t>(ln.from)].push_back(ln.to);
  }
  // breadth-first from the root; every node must be reached exactly once
  root_path.assign(static_cast<std::size_t>(n), {});
  std::vector<index_t> order;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<index_t> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    const index_t i = queue.front();
    queue.pop_front();
    order.push_back(i);
    for (index_t c : children[static_cast<std::size_t>(i)]) {
      if (seen[static_cast<std::size_t>(c)]) throw InvalidArgument("feeder contains a cycle");
      seen[static_cast<std::size_t>(c)] = 1;
      root_path[static_cast<std::size_t>(c)] = root_path[static_cast<std::size_t>(i)];
      root_path[static_cast<std::size_t>(c)].push_back(line_into[static_cast<std::size_t>(c)]);
      queue.push_back(c);
    }
  }
  if (static_cast<index_t>(order.size()) != n) throw InvalidArgument("feeder is not connected to the root");
  downstream.assign(lines.size(), {});
  for (index_t i = 1; i < n; ++i)
    for (index_t l : root_path[static_cast<std::size_t>(i)]) downstream[static_cast<std::size_t>(l)].push_back(i);
  controllable.assign(1, 0);
  for (index_t i = 1; i < n; ++i)
    if (nodes[static_cast<std::size_t>(i)].controllable) controllable.push_back(i);
}

void validate(const RadialNetwork& net) {
  if (net.line_into.size() != net.nodes.size()) throw InvalidArgument("feeder topology not built");
  for (std::size_t i = 1; i < net.nodes.size(); ++i) {
    const auto& nd = net.nodes[i];
    if (!(nd.vmin < 1.0 && 1.0 < nd.vmax)) throw InvalidArgument("node " + std::to_string(i) + " needs vmin < 1 < vmax");
  }
  for (const auto& nd : net.nodes)
    if (nd.gPmin > nd.gPmax || nd.gQmin > nd.gQmax) throw InvalidArgument("generator limits have min > max");
  for (const auto& l : net.lines)
    if (l.R < 0.0 || l.X < 0.0 || !(l.fbar > 0.0)) throw InvalidArgument("line needs R, X >= 0 and a positive limit");
  for (const auto& w : net.wind)
    if (w.node < 0 || w.node >= net.size() || !(w.capacity > 0.0))
      throw InvalidArgument("wind unit on an unknown node or with non-positive capacity");
}

std::vector<lp::Row> polygonal_soc(double fbar, int k, lp::Var fP, lp::Var fQ, lp::ModelBuilder& model) {
  return polygonal_soc(fbar, k, lp::LinExpr(fP), lp::LinExpr(fQ), model);
}

std::vector<lp::Row> polygonal_soc(double fbar, int k, const lp::LinExpr& fP, const lp::LinExpr& fQ,
                                   lp::ModelBuilder& model) {
  if (k < 4) throw InvalidArgument("polygonal flow limit needs at least 4 segments");
  if (!(fbar > 0.0)) throw InvalidArgument("flow limit must be positive");
  std::vector<lp::Row> rows;
  // inscribed: vertices on the circle at 2 pi m / k, faces between them
  const double half = std::numbers::pi / k;
  for (int m = 0; m < k; ++m) {
    const double a = 2.0 * half * m + half;
    lp::LinExpr e = fP * std::cos(a) + fQ * std::sin(a);
    rows.push_back(model.add_row(e, lp::Sense::le, fbar * std::cos(half), "flow_limit"));
  }
  return rows;
}

namespace {

// per-node wind forecast and per-node deviation map (nodes x W, system base)
vector_t node_forecast(const RadialNetwork& net, const vector_t& mu) {
  vector_t out = vector_t::Zero(net.size());
  for (std::size_t w = 0; w < net.wind.size(); ++w)
    out(net.wind[w].node) += net.wind[w].capacity * mu(static_cast<index_t>(w));
  return out;
}

vector_t capacities(const RadialNetwork& net) {
  vector_t c(static_cast<index_t>(net.wind.size()));
  for (std::size_t w = 0; w < net.wind.size(); ++w) c(static_cast<index_t>(w)) = net.wind[w].capacity;
  return c;
}

bool farm_in(const RadialNetwork& net, std::size_t w, index_t line) {
  const auto& d = net.downstream[static_cast<std::size_t>(line)];
  return std::find(d.begin(), d.end(), net.wind[w].node) != d.end();
}

}  // namespace

std::unique_ptr<RadialOpfModel> build_lindistflow_opf(const RadialNetwork& net_in, const UncertaintyDataset& ds,
                                                      const RadialOpfSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  auto m = std::make_unique<RadialOpfModel>();
  m->net = net_in;
  auto& net = m->net;
  net.build_topology();
  validate(net);
  const index_t n = net.size(), nl = n - 1, nw = static_cast<index_t>(net.wind.size());
  if (ds.dim() != nw)
    throw DimensionError("dataset has " + std::to_string(ds.dim()) + " columns but the feeder has " +
                         std::to_string(nw) + " wind units");
  if (settings.soc.cone && settings.soc.segments != 0) throw InvalidArgument("cone mode takes no segment count");
  if (!settings.soc.cone && settings.soc.segments < 4) throw InvalidArgument("polygonal flow limit needs at least 4 segments");
  m->ds = ds;
  m->support = SupportPolytope::for_forecast(ds.forecast);
  m->settings = settings;
  auto& model = m->model;
  m->wce = std::make_unique<WceContext>(model, m->ds, m->support, settings.spec, settings.wce);

  const vector_t mu_node = node_forecast(net, m->ds.forecast), cap = capacities(net);
  vector_t qmu_node = vector_t::Zero(n);
  for (std::size_t w = 0; w < net.wind.size(); ++w)
    qmu_node(net.wind[w].node) += net.wind[w].q_ratio * net.wind[w].capacity * m->ds.forecast(static_cast<index_t>(w));
  const auto nc = static_cast<index_t>(net.controllable.size());
  std::vector<index_t> slot(static_cast<std::size_t>(n), -1);
  for (index_t c = 0; c < nc; ++c) slot[static_cast<std::size_t>(net.controllable[static_cast<std::size_t>(c)])] = c;

  for (index_t c = 0; c < nc; ++c) {
    const auto& nd = net.nodes[static_cast<std::size_t>(net.controllable[static_cast<std::size_t>(c)])];
    m->gP.push_back(model.add_var(nd.gPmin, nd.gPmax, "gP"));
    m->gQ.push_back(model.add_var(nd.gQmin, nd.gQmax, "gQ"));
    m->V.push_back(model.add_vars(nw, -kInf, kInf, "V"));
    m->day_ahead_cost.add(m->gP.back(), nd.cost);
  }
  m->fP = model.add_vars(nl, -kInf, kInf, "fP");
  m->fQ = model.add_vars(nl, -kInf, kInf, "fQ");
  m->u = model.add_vars(n, -kInf, kInf, "u");
  model.set_bounds(m->u[0], 1.0, 1.0);

  // root balance, summed over every node below the root
  double dP = 0.0, dQ = 0.0;
  for (const auto& nd : net.nodes) {
    dP += nd.dP;
    dQ += nd.dQ;
  }
  lp::LinExpr rootP, rootQ;
  for (index_t c = 0; c < nc; ++c) {
    rootP.add(m->gP[static_cast<std::size_t>(c)], 1.0);
    rootQ.add(m->gQ[static_cast<std::size_t>(c)], 1.0);
  }
  model.add_row(rootP, lp::Sense::eq, dP - mu_node.sum(), "root_P");
  model.add_row(rootQ, lp::Sense::eq, dQ - qmu_node.sum(), "root_Q");

  for (index_t l = 0; l < nl; ++l) {
    lp::LinExpr eP(m->fP[static_cast<std::size_t>(l)]), eQ(m->fQ[static_cast<std::size_t>(l)]);
    double rhsP = 0.0, rhsQ = 0.0;
    for (index_t i : net.downstream[static_cast<std::size_t>(l)]) {
      const auto& nd = net.nodes[static_cast<std::size_t>(i)];
      rhsP += nd.dP - mu_node(i);
      rhsQ += nd.dQ - qmu_node(i);
      if (slot[static_cast<std::size_t>(i)] >= 0) {
        eP.add(m->gP[static_cast<std::size_t>(slot[static_cast<std::size_t>(i)])], 1.0);
        eQ.add(m->gQ[static_cast<std::size_t>(slot[static_cast<std::size_t>(i)])], 1.0);
      }
    }
    model.add_row(eP, lp::Sense::eq, rhsP, "flow_P");
    model.add_row(eQ, lp::Sense::eq, rhsQ, "flow_Q");
    const auto& ln = net.lines[static_cast<std::size_t>(l)];
    if (settings.soc.cone) {
      auto head = model.add_var(ln.fbar, ln.fbar);
      m->cone_aux.push_back(head);
      model.add_cone({head, m->fP[static_cast<std::size_t>(l)], m->fQ[static_cast<std::size_t>(l)]});
    } else {
      polygonal_soc(ln.fbar, settings.soc.segments, m->fP[static_cast<std::size_t>(l)], m->fQ[static_cast<std::size_t>(l)],
                    model);
    }
  }
  for (index_t i = 1; i < n; ++i) {
    lp::LinExpr e = lp::LinExpr(m->u[static_cast<std::size_t>(i)]) - lp::LinExpr(m->u[0]);
    for (index_t l : net.root_path[static_cast<std::size_t>(i)]) {
      const auto& ln = net.lines[static_cast<std::size_t>(l)];
      e.add(m->fP[static_cast<std::size_t>(l)], 2.0 * ln.R);
      e.add(m->fQ[static_cast<std::size_t>(l)], 2.0 * ln.X);
    }
    model.add_row(e, lp::Sense::eq, 0.0, "voltage");
  }
  for (index_t w = 0; w < nw; ++w) {
    lp::LinExpr part;
    for (index_t c = 0; c < nc; ++c) part.add(m->V[static_cast<std::size_t>(c)][static_cast<std::size_t>(w)], 1.0);
    model.add_row(part, lp::Sense::eq, -1.0, "rt_balance");
  }

  auto v_of = [&](index_t c, index_t w) { return m->V[static_cast<std::size_t>(c)][static_cast<std::size_t>(w)]; };

  AffineUncertainExpression cost;
  for (index_t w = 0; w < nw; ++w) {
    lp::LinExpr a;
    for (index_t c = 0; c < nc; ++c)
      a.add(v_of(c, w), cap(w) * net.nodes[static_cast<std::size_t>(net.controllable[static_cast<std::size_t>(c)])].cost);
    cost.a.push_back(std::move(a));
  }
  m->recourse = m->wce->add_block({cost});

  // uncertain limits go through the CVaR wrapper; certain ones become plain rows
  auto limit = [&](const AffineUncertainExpression& e, double eps) {
    if (e.certain()) {
      model.add_row(e.b, lp::Sense::le, 0.0);
      return;
    }
    m->drcc.push_back(m->wce->add_drcc({{e}, eps}));
  };
  for (index_t c = 0; c < nc; ++c) {
    const auto& nd = net.nodes[static_cast<std::size_t>(net.controllable[static_cast<std::size_t>(c)])];
    AffineUncertainExpression pu, pd, qu, qd;
    for (index_t w = 0; w < nw; ++w) {
      const double q = net.wind[static_cast<std::size_t>(w)].q_ratio;
      pu.a.emplace_back(v_of(c, w), cap(w));
      pd.a.emplace_back(v_of(c, w), -cap(w));
      qu.a.push_back(q == 0.0 ? lp::LinExpr() : lp::LinExpr(v_of(c, w), q * cap(w)));
      qd.a.push_back(q == 0.0 ? lp::LinExpr() : lp::LinExpr(v_of(c, w), -q * cap(w)));
    }
    pu.b = lp::LinExpr(m->gP[static_cast<std::size_t>(c)]) - nd.gPmax;
    pd.b = nd.gPmin - lp::LinExpr(m->gP[static_cast<std::size_t>(c)]);
    qu.b = lp::LinExpr(m->gQ[static_cast<std::size_t>(c)]) - nd.gQmax;
    qd.b = nd.gQmin - lp::LinExpr(m->gQ[static_cast<std::size_t>(c)]);
    limit(pu, settings.eps_gen_up);
    limit(pd, settings.eps_gen_dn);
    limit(qu, settings.eps_gen_up);
    limit(qd, settings.eps_gen_dn);
  }
  for (index_t i = 1; i < n; ++i) {
    const auto& nd = net.nodes[static_cast<std::size_t>(i)];
    AffineUncertainExpression up, dn;
    for (index_t w = 0; w < nw; ++w) {
      const auto& farm = net.wind[static_cast<std::size_t>(w)];
      lp::LinExpr a;
      for (index_t l : net.root_path[static_cast<std::size_t>(i)]) {
        const auto& ln = net.lines[static_cast<std::size_t>(l)];
        const double k = 2.0 * cap(w) * (ln.R + ln.X * farm.q_ratio);
        for (index_t j : net.downstream[static_cast<std::size_t>(l)])
          if (slot[static_cast<std::size_t>(j)] >= 0) a.add(v_of(slot[static_cast<std::size_t>(j)], w), k);
        if (farm_in(net, static_cast<std::size_t>(w), l)) a.add_constant(k);
      }
      a.compress();
      dn.a.push_back(-a);
      up.a.push_back(std::move(a));
    }
    up.b = lp::LinExpr(m->u[static_cast<std::size_t>(i)]) - nd.vmax * nd.vmax;
    dn.b = nd.vmin * nd.vmin - lp::LinExpr(m->u[static_cast<std::size_t>(i)]);
    limit(up, settings.eps_volt_up);
    limit(dn, settings.eps_volt_dn);
  }
  model.set_objective(m->day_ahead_cost + m->recourse.objective_contribution, lp::ObjSense::minimize);
  m->build_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

RadialSolution solve_radial(RadialOpfModel& m, const lp::LpBackend& backend, const lp::SolveOptions& options) {
  RadialSolution sol;
  sol.build_time = m.build_time;
  auto res = lp::solve(m.model, backend, options);
  sol.status = res.status;
  sol.wall_time = res.wall_time;
  sol.rounds = res.rounds;
  sol.message = res.message;
  if (!res.optimal()) return sol;
  const auto& net = m.net;
  const index_t n = net.size(), nw = m.ds.dim();
  sol.gP = vector_t::Zero(n);
  sol.gQ = vector_t::Zero(n);
  sol.V = matrix_t::Zero(n, nw);
  for (std::size_t c = 0; c < net.controllable.size(); ++c) {
    const index_t i = net.controllable[c];
    sol.gP(i) = res.value(m.gP[c]);
    sol.gQ(i) = res.value(m.gQ[c]);
    for (index_t w = 0; w < nw; ++w) sol.V(i, w) = res.value(m.V[c][static_cast<std::size_t>(w)]);
  }
  sol.fP.resize(n - 1);
  sol.fQ.resize(n - 1);
  for (index_t l = 0; l < n - 1; ++l) {
    sol.fP(l) = res.value(m.fP[static_cast<std::size_t>(l)]);
    sol.fQ(l) = res.value(m.fQ[static_cast<std::size_t>(l)]);
  }
  sol.u.resize(n);
  for (index_t i = 0; i < n; ++i) sol.u(i) = res.value(m.u[static_cast<std::size_t>(i)]);
  sol.objective = res.objective_value;
  sol.day_ahead_cost = res.value(m.day_ahead_cost);
  sol.recourse_cost = res.value(m.recourse.objective_contribution);
  return sol;
}

RealTimeState realtime_state(const RadialSolution& sol, const RadialNetwork& net, const vector_t& xi) {
  const index_t nw = static_cast<index_t>(net.wind.size());
  if (xi.size() != nw)
    throw DimensionError("realization has " + std::to_string(xi.size()) + " entries for " + std::to_string(nw) +
                         " wind units");
  if (net.downstream.size() != net.lines.size()) throw InvalidArgument("feeder topology not built");
  const vector_t cap = capacities(net);
  vector_t xq(nw);
  for (index_t w = 0; w < nw; ++w) xq(w) = net.wind[static_cast<std::size_t>(w)].q_ratio;
  const vector_t dP = cap.cwiseProduct(xi), dQ = xq.cwiseProduct(dP);
  RealTimeState s;
  s.gP = sol.gP + sol.V * dP;
  s.gQ = sol.gQ + sol.V * dQ;
  // wind deviation landing at each node
  vector_t nodeP = vector_t::Zero(net.size()), nodeQ = vector_t::Zero(net.size());
  for (index_t w = 0; w < nw; ++w) {
    nodeP(net.wind[static_cast<std::size_t>(w)].node) += dP(w);
    nodeQ(net.wind[static_cast<std::size_t>(w)].node) += dQ(w);
  }
  const vector_t respP = sol.V * dP, respQ = sol.V * dQ;
  s.fP = sol.fP;
  s.fQ = sol.fQ;
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    for (index_t i : net.downstream[l]) {
      s.fP(static_cast<index_t>(l)) -= respP(i) + nodeP(i);
      s.fQ(static_cast<index_t>(l)) -= respQ(i) + nodeQ(i);
    }
  s.u = vector_t::Ones(net.size()) * sol.u(0);
  for (index_t i = 1; i < net.size(); ++i)
    for (index_t l : net.root_path[static_cast<std::size_t>(i)]) {
      const auto& ln = net.lines[static_cast<std::size_t>(l)];
      s.u(i) -= 2.0 * (s.fP(l) * ln.R + s.fQ(l) * ln.X);
    }
  return s;
}

double RadialResiduals::max() const { return std::max({root_voltage, balance, voltage, participation}); }

RadialResiduals radial_residuals(const RadialNetwork& net, const UncertaintyDataset& ds, const RadialSolution& sol) {
  if (!sol.optimal()) throw InvalidArgument("residuals need an optimal solution");
  RadialResiduals r;
  const vector_t mu = node_forecast(net, ds.forecast);
  vector_t qmu = vector_t::Zero(net.size());
  for (std::size_t w = 0; w < net.wind.size(); ++w)
    qmu(net.wind[w].node) += net.wind[w].q_ratio * net.wind[w].capacity * ds.forecast(static_cast<index_t>(w));
  r.root_voltage = std::fabs(sol.u(0) - 1.0);
  double netP = 0.0, netQ = 0.0;
  for (index_t i = 0; i < net.size(); ++i) {
    const auto& nd = net.nodes[static_cast<std::size_t>(i)];
    if (i > 0) {
      netP += nd.dP - sol.gP(i) - mu(i);
      netQ += nd.dQ - sol.gQ(i) - qmu(i);
    } else {
      netP += nd.dP - mu(i);
      netQ += nd.dQ - qmu(i);
    }
  }
  r.balance = std::max(std::fabs(sol.gP(0) - netP), std::fabs(sol.gQ(0) - netQ));
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    double p = 0.0, q = 0.0;
    for (index_t i : net.downstream[l]) {
      const auto& nd = net.nodes[static_cast<std::size_t>(i)];
      p += nd.dP - sol.gP(i) - mu(i);
      q += nd.dQ - sol.gQ(i) - qmu(i);
    }
    r.balance = std::max({r.balance, std::fabs(sol.fP(static_cast<index_t>(l)) - p),
                          std::fabs(sol.fQ(static_cast<index_t>(l)) - q)});
  }
  for (index_t i = 1; i < net.size(); ++i) {
    double u = sol.u(0);
    for (index_t l : net.root_path[static_cast<std::size_t>(i)]) {
      const auto& ln = net.lines[static_cast<std::size_t>(l)];
      u -= 2.0 * (sol.fP(l) * ln.R + sol.fQ(l) * ln.X);
    }
    r.voltage = std::max(r.voltage, std::fabs(sol.u(i) - u));
  }
  for (index_t w = 0; w < sol.V.cols(); ++w) r.participation = std::max(r.participation, std::fabs(sol.V.col(w).sum() + 1.0));
  return r;
}

double radial_scenario_violation(const RadialNetwork& net, const RadialSolution& sol, const matrix_t& points) {
  double worst = 0.0;
  for (index_t k = 0; k < points.rows(); ++k) {
    const auto s = realtime_state(sol, net, points.row(k).transpose());
    for (index_t i : net.controllable) {
      const auto& nd = net.nodes[static_cast<std::size_t>(i)];
      worst = std::max({worst, s.gP(i) - nd.gPmax, nd.gPmin - s.gP(i), s.gQ(i) - nd.gQmax, nd.gQmin - s.gQ(i)});
    }
    for (index_t i = 1; i < net.size(); ++i) {
      const auto& nd = net.nodes[static_cast<std::size_t>(i)];
      worst = std::max({worst, s.u(i) - nd.vmax * nd.vmax, nd.vmin * nd.vmin - s.u(i)});
    }
  }
  return worst;
}

}  // namespace cdro
