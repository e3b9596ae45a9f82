#include "cdro/oos.hpp"

#include "cdro/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace cdro {

void parallel_for(index_t count, unsigned threads, const std::function<void(index_t)>& fn) {
  if (count <= 0) return;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<index_t>(threads, count));
  std::atomic<index_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (index_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

namespace {

void check_realization(const vector_t& forecast, const vector_t& xi, std::size_t farms) {
  if (xi.size() != static_cast<index_t>(farms) || forecast.size() != static_cast<index_t>(farms))
    throw DimensionError("realization has " + std::to_string(xi.size()) + " entries for " + std::to_string(farms) +
                         " wind farms");
}

// recourse cost term for an activation split into up and down parts
void price_activation(lp::LinExpr& obj, lp::Var up, lp::Var dn, double c, const RealTimePrices& p) {
  obj.add(up, c);
  obj.add(dn, p.signed_recourse ? -c : c);
}

}  // namespace

RealTimeOutcome realtime_redispatch(const DayAheadSolution& sol, const DcNetwork& net, const vector_t& forecast,
                                    const vector_t& xi, const RealTimePrices& prices, const lp::LpBackend& backend) {
  if (!sol.optimal()) throw InvalidArgument("real-time redispatch needs an optimal day-ahead solution");
  check_realization(forecast, xi, net.wind.size());
  const auto np = static_cast<index_t>(net.generators.size()), nd = static_cast<index_t>(net.loads.size()),
             nw = static_cast<index_t>(net.wind.size()), nf = static_cast<index_t>(net.lines.size());
  const vector_t cap = net.wind_capacity(), d = net.demand();
  const vector_t wind = cap.cwiseProduct(forecast + xi).cwiseMax(0.0);

  lp::ModelBuilder m;
  auto up = m.add_vars(np, 0.0, 0.0, "up"), dn = m.add_vars(np, 0.0, 0.0, "dn");
  for (index_t p = 0; p < np; ++p) {
    m.set_bounds(up[static_cast<std::size_t>(p)], 0.0, std::max(0.0, sol.r_up(p)));
    m.set_bounds(dn[static_cast<std::size_t>(p)], 0.0, std::max(0.0, sol.r_dn(p)));
  }
  std::vector<lp::Var> shed, curt;
  for (index_t j = 0; j < nd; ++j) shed.push_back(m.add_var(0.0, d(j), "shed"));
  for (index_t w = 0; w < nw; ++w) curt.push_back(m.add_var(0.0, wind(w), "curtail"));
  auto over_up = m.add_vars(nf, 0.0, kInf, "over_up"), over_dn = m.add_vars(nf, 0.0, kInf, "over_dn");

  lp::LinExpr obj, balance;
  for (index_t p = 0; p < np; ++p) {
    price_activation(obj, up[static_cast<std::size_t>(p)], dn[static_cast<std::size_t>(p)], net.generators[static_cast<std::size_t>(p)].cost,
                     prices);
    balance.add(up[static_cast<std::size_t>(p)], 1.0).add(dn[static_cast<std::size_t>(p)], -1.0);
  }
  for (index_t j = 0; j < nd; ++j) {
    obj.add(shed[static_cast<std::size_t>(j)], prices.voll);
    balance.add(shed[static_cast<std::size_t>(j)], 1.0);
  }
  for (index_t w = 0; w < nw; ++w) {
    obj.add(curt[static_cast<std::size_t>(w)], prices.spill);
    balance.add(curt[static_cast<std::size_t>(w)], -1.0);
  }
  for (index_t f = 0; f < nf; ++f) {
    obj.add(over_up[static_cast<std::size_t>(f)], prices.voll);
    obj.add(over_dn[static_cast<std::size_t>(f)], prices.voll);
  }
  // generation + wind - curtail = demand - shed
  m.add_row(balance, lp::Sense::eq, d.sum() - sol.g.sum() - wind.sum(), "balance");
  for (index_t f = 0; f < nf; ++f) {
    lp::LinExpr flow;
    for (index_t p = 0; p < np; ++p) {
      flow.add(up[static_cast<std::size_t>(p)], net.ptdf_gen(f, p));
      flow.add(dn[static_cast<std::size_t>(p)], -net.ptdf_gen(f, p));
    }
    for (index_t w = 0; w < nw; ++w) flow.add(curt[static_cast<std::size_t>(w)], -net.ptdf_wind(f, w));
    for (index_t j = 0; j < nd; ++j) flow.add(shed[static_cast<std::size_t>(j)], net.ptdf_load(f, j));
    const double base = net.ptdf_gen.row(f).dot(sol.g) + net.ptdf_wind.row(f).dot(wind) - net.ptdf_load.row(f).dot(d);
    const double fmax = net.lines[static_cast<std::size_t>(f)].fmax;
    m.add_row(flow - lp::LinExpr(over_up[static_cast<std::size_t>(f)]), lp::Sense::le, fmax - base, "line_up");
    m.add_row(flow + lp::LinExpr(over_dn[static_cast<std::size_t>(f)]), lp::Sense::ge, -fmax - base, "line_dn");
  }
  m.set_objective(obj, lp::ObjSense::minimize);
  auto res = lp::solve(m, backend);
  RealTimeOutcome out;
  out.status = res.status;
  if (!res.optimal()) return out;
  out.recourse.resize(np);
  for (index_t p = 0; p < np; ++p)
    out.recourse(p) = res.value(up[static_cast<std::size_t>(p)]) - res.value(dn[static_cast<std::size_t>(p)]);
  out.shed.resize(nd);
  for (index_t j = 0; j < nd; ++j) out.shed(j) = std::max(0.0, res.value(shed[static_cast<std::size_t>(j)]));
  out.curtail.resize(nw);
  for (index_t w = 0; w < nw; ++w) out.curtail(w) = std::max(0.0, res.value(curt[static_cast<std::size_t>(w)]));
  out.overload.resize(nf);
  for (index_t f = 0; f < nf; ++f)
    out.overload(f) = res.value(over_up[static_cast<std::size_t>(f)]) + res.value(over_dn[static_cast<std::size_t>(f)]);
  out.cost = res.objective_value * prices.period_hours;
  return out;
}

RealTimeOutcome realtime_redispatch(const RadialSolution& sol, const RadialNetwork& net, const vector_t& forecast,
                                    const vector_t& xi, const RealTimePrices& prices, const lp::LpBackend& backend,
                                    int polygon_segments) {
  if (!sol.optimal()) throw InvalidArgument("real-time redispatch needs an optimal day-ahead solution");
  if (net.downstream.size() != net.lines.size()) throw InvalidArgument("feeder topology not built");
  check_realization(forecast, xi, net.wind.size());
  const index_t n = net.size(), nw = static_cast<index_t>(net.wind.size());
  vector_t windP = vector_t::Zero(n), windQ = vector_t::Zero(n);
  vector_t avail(nw);
  for (index_t w = 0; w < nw; ++w) {
    const auto& farm = net.wind[static_cast<std::size_t>(w)];
    avail(w) = std::max(0.0, farm.capacity * (forecast(w) + xi(w)));
  }

  lp::ModelBuilder m;
  std::vector<lp::Var> up(static_cast<std::size_t>(n)), dn(static_cast<std::size_t>(n)), gQ(static_cast<std::size_t>(n));
  std::vector<lp::Var> sigma, curt;
  lp::LinExpr obj;
  for (index_t i : net.controllable) {
    const auto& nd = net.nodes[static_cast<std::size_t>(i)];
    const double g0 = sol.gP(i);
    up[static_cast<std::size_t>(i)] = m.add_var(0.0, std::max(0.0, nd.gPmax - g0), "up");
    dn[static_cast<std::size_t>(i)] = m.add_var(0.0, std::max(0.0, g0 - nd.gPmin), "dn");
    gQ[static_cast<std::size_t>(i)] = m.add_var(nd.gQmin, nd.gQmax, "gQ");
    price_activation(obj, up[static_cast<std::size_t>(i)], dn[static_cast<std::size_t>(i)], nd.cost * net.base_mva, prices);
  }
  for (index_t i = 0; i < n; ++i) {
    sigma.push_back(m.add_var(0.0, 1.0, "shed"));
    obj.add(sigma.back(), prices.voll * net.nodes[static_cast<std::size_t>(i)].dP * net.base_mva);
  }
  for (index_t w = 0; w < nw; ++w) {
    curt.push_back(m.add_var(0.0, avail(w), "curtail"));
    obj.add(curt.back(), prices.spill * net.base_mva);
  }
  // net withdrawal at node i as an expression (P and Q)
  auto withdrawal = [&](index_t i, bool reactive) {
    const auto& nd = net.nodes[static_cast<std::size_t>(i)];
    const double d = reactive ? nd.dQ : nd.dP;
    lp::LinExpr e(d);
    e.add(sigma[static_cast<std::size_t>(i)], -d);
    if (up[static_cast<std::size_t>(i)].valid()) {
      if (reactive) {
        e.add(gQ[static_cast<std::size_t>(i)], -1.0);
      } else {
        e.add_constant(-sol.gP(i));
        e.add(up[static_cast<std::size_t>(i)], -1.0).add(dn[static_cast<std::size_t>(i)], 1.0);
      }
    }
    for (index_t w = 0; w < nw; ++w) {
      const auto& farm = net.wind[static_cast<std::size_t>(w)];
      if (farm.node != i) continue;
      const double k = reactive ? farm.q_ratio : 1.0;
      if (k == 0.0) continue;
      e.add_constant(-k * avail(w));
      e.add(curt[static_cast<std::size_t>(w)], k);
    }
    return e;
  };
  lp::LinExpr totalP, totalQ;
  for (index_t i = 0; i < n; ++i) {
    totalP += withdrawal(i, false);
    totalQ += withdrawal(i, true);
  }
  // substation output equals total net withdrawal, which is already inside totalP via node 0
  m.add_row(totalP, lp::Sense::eq, 0.0, "balance_P");
  m.add_row(totalQ, lp::Sense::eq, 0.0, "balance_Q");
  const auto nl = static_cast<index_t>(net.lines.size());
  std::vector<lp::LinExpr> fP(static_cast<std::size_t>(nl)), fQ(static_cast<std::size_t>(nl));
  for (index_t l = 0; l < nl; ++l) {
    for (index_t i : net.downstream[static_cast<std::size_t>(l)]) {
      fP[static_cast<std::size_t>(l)] += withdrawal(i, false);
      fQ[static_cast<std::size_t>(l)] += withdrawal(i, true);
    }
    polygonal_soc(net.lines[static_cast<std::size_t>(l)].fbar, polygon_segments, fP[static_cast<std::size_t>(l)],
                  fQ[static_cast<std::size_t>(l)], m);
  }
  for (index_t i = 1; i < n; ++i) {
    lp::LinExpr drop;
    for (index_t l : net.root_path[static_cast<std::size_t>(i)]) {
      const auto& ln = net.lines[static_cast<std::size_t>(l)];
      drop.add(fP[static_cast<std::size_t>(l)], 2.0 * ln.R);
      drop.add(fQ[static_cast<std::size_t>(l)], 2.0 * ln.X);
    }
    const auto& nd = net.nodes[static_cast<std::size_t>(i)];
    // u_i = 1 - drop
    m.add_row(drop, lp::Sense::le, 1.0 - nd.vmin * nd.vmin, "v_min");
    m.add_row(drop, lp::Sense::ge, 1.0 - nd.vmax * nd.vmax, "v_max");
  }
  m.set_objective(obj, lp::ObjSense::minimize);
  auto res = lp::solve(m, backend);
  RealTimeOutcome out;
  out.status = res.status;
  if (!res.optimal()) return out;
  out.recourse = vector_t::Zero(n);
  for (index_t i : net.controllable)
    out.recourse(i) = (res.value(up[static_cast<std::size_t>(i)]) - res.value(dn[static_cast<std::size_t>(i)])) * net.base_mva;
  out.shed.resize(n);
  for (index_t i = 0; i < n; ++i)
    out.shed(i) = std::max(0.0, res.value(sigma[static_cast<std::size_t>(i)])) * net.nodes[static_cast<std::size_t>(i)].dP * net.base_mva;
  out.curtail.resize(nw);
  for (index_t w = 0; w < nw; ++w) out.curtail(w) = std::max(0.0, res.value(curt[static_cast<std::size_t>(w)])) * net.base_mva;
  out.cost = res.objective_value * prices.period_hours;
  return out;
}

namespace {

struct RateCounter {
  std::vector<std::string> names;
  std::vector<index_t> hits;
  void add(std::string name) {
    names.push_back(std::move(name));
    hits.push_back(0);
  }
};

template <class Eval>
OosReport aggregate(index_t count, double day_ahead, const OosOptions& options, RateCounter rates, Eval&& eval) {
  const auto t0 = std::chrono::steady_clock::now();
  OosReport rep;
  rep.day_ahead_cost = day_ahead;
  rep.per_sample.resize(static_cast<std::size_t>(count));
  std::vector<std::vector<char>> hit(static_cast<std::size_t>(count));
  parallel_for(count, options.threads, [&](index_t i) {
    auto& s = rep.per_sample[static_cast<std::size_t>(i)];
    s.index = i;
    eval(i, s, hit[static_cast<std::size_t>(i)]);
  });
  // fixed summation order keeps the report independent of scheduling
  std::vector<double> costs;
  double shed = 0.0;
  for (index_t i = 0; i < count; ++i) {
    const auto& s = rep.per_sample[static_cast<std::size_t>(i)];
    const auto& h = hit[static_cast<std::size_t>(i)];
    for (std::size_t r = 0; r < h.size() && r < rates.hits.size(); ++r) rates.hits[r] += h[r];
    if (s.status != lp::SolveStatus::optimal) {
      ++rep.failures;
      continue;
    }
    costs.push_back(s.cost);
    shed += s.shed;
  }
  if (!costs.empty()) {
    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= static_cast<double>(costs.size());
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    rep.std_dev = costs.size() > 1 ? std::sqrt(var / static_cast<double>(costs.size() - 1)) : 0.0;
    rep.expected_cost = day_ahead + mean;
    rep.eens = shed / static_cast<double>(costs.size()) * options.prices.period_hours;
  } else {
    rep.expected_cost = std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t r = 0; r < rates.names.size(); ++r)
    rep.violation_rates.push_back({rates.names[r], static_cast<double>(rates.hits[r]) / static_cast<double>(count)});
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

constexpr double kViolationTol = 1e-7;

}  // namespace

OosReport evaluate_out_of_sample(const DayAheadSolution& sol, const DcNetwork& net, const UncertaintyDataset& oos,
                                 const lp::LpBackend& backend, const OosOptions& options) {
  if (oos.sample_count() == 0) throw InvalidArgument("out-of-sample set is empty");
  if (!sol.optimal()) throw InvalidArgument("out-of-sample evaluation needs an optimal day-ahead solution");
  if (oos.dim() != static_cast<index_t>(net.wind.size()))
    throw DimensionError("out-of-sample set has " + std::to_string(oos.dim()) + " columns for " +
                         std::to_string(net.wind.size()) + " wind farms");
  const auto np = static_cast<index_t>(net.generators.size()), nf = static_cast<index_t>(net.lines.size());
  RateCounter rates;
  for (index_t p = 0; p < np; ++p) rates.add("reserve_up:" + net.generators[static_cast<std::size_t>(p)].name);
  for (index_t p = 0; p < np; ++p) rates.add("reserve_down:" + net.generators[static_cast<std::size_t>(p)].name);
  for (index_t f = 0; f < nf; ++f) rates.add("line:" + std::to_string(f + 1));
  const vector_t cap = net.wind_capacity(), d = net.demand();
  return aggregate(oos.sample_count(), sol.day_ahead_cost, options, rates,
                   [&](index_t i, SampleSummary& s, std::vector<char>& hit) {
                     const vector_t xi = oos.deviations.row(i).transpose();
                     const vector_t resp = sol.V * xi;
                     const vector_t flow = net.ptdf_gen * (sol.g + resp) +
                                           net.ptdf_wind * cap.cwiseProduct(oos.forecast + xi) - net.ptdf_load * d;
                     for (index_t p = 0; p < np; ++p) hit.push_back(resp(p) - sol.r_up(p) > kViolationTol);
                     for (index_t p = 0; p < np; ++p) hit.push_back(-resp(p) - sol.r_dn(p) > kViolationTol);
                     for (index_t f = 0; f < nf; ++f)
                       hit.push_back(std::fabs(flow(f)) - net.lines[static_cast<std::size_t>(f)].fmax > kViolationTol);
                     auto rt = realtime_redispatch(sol, net, oos.forecast, xi, options.prices, backend);
                     s.status = rt.status;
                     if (!rt.optimal()) return;
                     s.cost = rt.cost;
                     s.shed = rt.shed.sum();
                     s.curtail = rt.curtail.sum();
                   });
}

OosReport evaluate_out_of_sample(const RadialSolution& sol, const RadialNetwork& net, const UncertaintyDataset& oos,
                                 const lp::LpBackend& backend, const OosOptions& options) {
  if (oos.sample_count() == 0) throw InvalidArgument("out-of-sample set is empty");
  if (!sol.optimal()) throw InvalidArgument("out-of-sample evaluation needs an optimal day-ahead solution");
  if (oos.dim() != static_cast<index_t>(net.wind.size()))
    throw DimensionError("out-of-sample set has " + std::to_string(oos.dim()) + " columns for " +
                         std::to_string(net.wind.size()) + " wind farms");
  RateCounter rates;
  for (index_t i : net.controllable) {
    rates.add("gen_up:" + std::to_string(i));
    rates.add("gen_down:" + std::to_string(i));
  }
  for (index_t i = 1; i < net.size(); ++i) {
    rates.add("voltage_up:" + std::to_string(i));
    rates.add("voltage_down:" + std::to_string(i));
  }
  return aggregate(
      oos.sample_count(), sol.day_ahead_cost * net.base_mva, options, rates,
      [&](index_t i, SampleSummary& s, std::vector<char>& hit) {
        const vector_t xi = oos.deviations.row(i).transpose();
        const auto st = realtime_state(sol, net, xi);
        for (index_t c : net.controllable) {
          const auto& nd = net.nodes[static_cast<std::size_t>(c)];
          hit.push_back(st.gP(c) - nd.gPmax > kViolationTol);
          hit.push_back(nd.gPmin - st.gP(c) > kViolationTol);
        }
        for (index_t k = 1; k < net.size(); ++k) {
          const auto& nd = net.nodes[static_cast<std::size_t>(k)];
          hit.push_back(st.u(k) - nd.vmax * nd.vmax > kViolationTol);
          hit.push_back(nd.vmin * nd.vmin - st.u(k) > kViolationTol);
        }
        auto rt = realtime_redispatch(sol, net, oos.forecast, xi, options.prices, backend, options.polygon_segments);
        s.status = rt.status;
        if (!rt.optimal()) return;
        s.cost = rt.cost;
        s.shed = rt.shed.sum();
        s.curtail = rt.curtail.sum();
      });
}

}  // namespace cdro
