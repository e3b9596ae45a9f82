#include "cdro/transport.hpp"

#include "cdro/empirical.hpp"
#include "cdro/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cdro {

TransportPlan wasserstein_distance(const DiscreteDistribution& p, const DiscreteDistribution& q, GroundNorm norm,
                                   const lp::LpBackend& backend) {
  validate(p);
  validate(q);
  if (p.points.cols() != q.points.cols())
    throw DimensionError("distributions live in dimensions " + std::to_string(p.points.cols()) + " and " +
                         std::to_string(q.points.cols()));
  const index_t m = p.points.rows(), n = q.points.rows();
  lp::ModelBuilder model;
  std::vector<lp::Var> f(static_cast<std::size_t>(m * n));
  lp::LinExpr obj;
  for (index_t a = 0; a < m; ++a)
    for (index_t b = 0; b < n; ++b) {
      auto v = model.add_var(0.0, kInf);
      f[static_cast<std::size_t>(a * n + b)] = v;
      obj.add(v, ground_distance(p.points.row(a) - q.points.row(b), norm));
    }
  for (index_t a = 0; a < m; ++a) {
    lp::LinExpr row;
    for (index_t b = 0; b < n; ++b) row.add(f[static_cast<std::size_t>(a * n + b)], 1.0);
    model.add_row(row, lp::Sense::eq, p.weights(a));
  }
  for (index_t b = 0; b < n; ++b) {
    lp::LinExpr col;
    for (index_t a = 0; a < m; ++a) col.add(f[static_cast<std::size_t>(a * n + b)], 1.0);
    model.add_row(col, lp::Sense::eq, q.weights(b));
  }
  model.set_objective(obj, lp::ObjSense::minimize);
  auto res = lp::solve(model, backend);
  if (!res.optimal())
    throw SolverError(std::string("transport LP ended with status ") + lp::to_string(res.status));
  TransportPlan plan;
  plan.flow.resize(m, n);
  for (index_t a = 0; a < m; ++a)
    for (index_t b = 0; b < n; ++b) plan.flow(a, b) = std::max(0.0, res.value(f[static_cast<std::size_t>(a * n + b)]));
  plan.cost = res.objective_value;
  return plan;
}

std::vector<vector_t> oracle_axes(const UncertaintyDataset& ds, const SupportPolytope& sp, index_t points_per_dim) {
  if (points_per_dim < 2) throw InvalidArgument("oracle grid needs at least 2 points per dimension");
  std::vector<vector_t> axes;
  for (index_t k = 0; k < ds.dim(); ++k) {
    std::vector<std::pair<double, bool>> v;  // (value, is sample)
    for (index_t g = 0; g < points_per_dim; ++g) {
      double t = static_cast<double>(g) / static_cast<double>(points_per_dim - 1);
      v.emplace_back(g + 1 == points_per_dim ? sp.xi_max(k) : sp.xi_min(k) + t * (sp.xi_max(k) - sp.xi_min(k)), false);
    }
    for (index_t i = 0; i < ds.sample_count(); ++i) v.emplace_back(ds.deviations(i, k), true);
    std::sort(v.begin(), v.end());
    std::vector<double> u;
    bool last_sample = false;
    for (const auto& [x, is_sample] : v) {
      if (u.empty() || x - u.back() > 1e-12) {
        u.push_back(x);
        last_sample = is_sample;
      } else if (is_sample && !last_sample) {
        u.back() = x;  // a mesh point collided with a sample: keep the exact sample value
        last_sample = true;
      }
    }
    axes.push_back(Eigen::Map<vector_t>(u.data(), static_cast<index_t>(u.size())));
  }
  return axes;
}

OracleResult oracle_worst_case_expectation(const vector_t& a, double b, const UncertaintyDataset& ds,
                                           const SupportPolytope& sp, const AmbiguitySpec& spec,
                                           const OracleOptions& options, const lp::LpBackend& backend) {
  return oracle_worst_case_expectation(std::vector<AffinePiece>{{a, b}}, ds, sp, spec, options, backend);
}

OracleResult oracle_worst_case_expectation(const std::vector<AffinePiece>& pieces, const UncertaintyDataset& ds,
                                           const SupportPolytope& sp, const AmbiguitySpec& spec,
                                           const OracleOptions& options, const lp::LpBackend& backend) {
  validate(spec);
  require_valid(ds, sp);
  const index_t n = ds.sample_count(), w = ds.dim();
  if (pieces.empty()) throw InvalidArgument("oracle needs at least one affine piece");
  for (const auto& pc : pieces)
    if (pc.a.size() != w) throw DimensionError("coefficient vector has size " + std::to_string(pc.a.size()) +
                                               " but the dataset has " + std::to_string(w) + " columns");
  if (options.enforce_desk_scale && (w > 2 || n > 5 || options.grid_points_per_dim > 15))
    throw InvalidArgument("oracle is limited to |W| <= 2, N <= 5 and at most 15 grid points per dimension");

  auto axes = oracle_axes(ds, sp, options.grid_points_per_dim);
  index_t gcount = 1;
  for (const auto& ax : axes) gcount *= ax.size();
  matrix_t grid(gcount, w);
  for (index_t g = 0; g < gcount; ++g) {
    index_t rest = g;
    for (index_t k = 0; k < w; ++k) {
      grid(g, k) = axes[static_cast<std::size_t>(k)](rest % axes[static_cast<std::size_t>(k)].size());
      rest /= axes[static_cast<std::size_t>(k)].size();
    }
  }
  const matrix_t grid_u = cdf_images(grid, ds.deviations);
  const matrix_t sample_u = copula_pseudo_observations(ds);
  const bool copula = spec.theta2.has_value() && std::isfinite(*spec.theta2);
  const bool separate = copula && options.coupling == CouplingMode::separate;
  const double inv_n = 1.0 / static_cast<double>(n);

  lp::ModelBuilder model;
  std::vector<lp::Var> f(static_cast<std::size_t>(gcount * n)), h;
  lp::LinExpr obj, budget1, budget2;
  for (index_t g = 0; g < gcount; ++g) {
    double payoff = -kInf;
    for (const auto& pc : pieces) payoff = std::max(payoff, pc.a.dot(grid.row(g).transpose()) + pc.b);
    for (index_t i = 0; i < n; ++i) {
      auto v = model.add_var(0.0, kInf);
      f[static_cast<std::size_t>(g * n + i)] = v;
      obj.add(v, payoff);
      budget1.add(v, ground_distance(grid.row(g) - ds.deviations.row(i), spec.ground_norm));
      if (copula && !separate) budget2.add(v, ground_distance(grid_u.row(g) - sample_u.row(i), spec.ground_norm));
    }
  }
  if (separate) {
    h.resize(f.size());
    for (index_t g = 0; g < gcount; ++g)
      for (index_t i = 0; i < n; ++i) {
        auto v = model.add_var(0.0, kInf);
        h[static_cast<std::size_t>(g * n + i)] = v;
        budget2.add(v, ground_distance(grid_u.row(g) - sample_u.row(i), spec.ground_norm));
      }
  }
  for (index_t i = 0; i < n; ++i) {
    lp::LinExpr row, hrow;
    for (index_t g = 0; g < gcount; ++g) {
      row.add(f[static_cast<std::size_t>(g * n + i)], 1.0);
      if (separate) hrow.add(h[static_cast<std::size_t>(g * n + i)], 1.0);
    }
    model.add_row(row, lp::Sense::eq, inv_n);
    if (separate) model.add_row(hrow, lp::Sense::eq, inv_n);
  }
  if (separate) {
    for (index_t g = 0; g < gcount; ++g) {
      lp::LinExpr link;
      for (index_t i = 0; i < n; ++i) {
        link.add(f[static_cast<std::size_t>(g * n + i)], 1.0);
        link.add(h[static_cast<std::size_t>(g * n + i)], -1.0);
      }
      model.add_row(link, lp::Sense::eq, 0.0);
    }
  }
  if (std::isfinite(spec.theta1)) model.add_row(budget1, lp::Sense::le, spec.theta1);
  if (copula) model.add_row(budget2, lp::Sense::le, *spec.theta2);
  model.set_objective(obj, lp::ObjSense::maximize);

  auto res = lp::solve(model, backend);
  OracleResult out;
  out.status = res.status;
  if (!res.optimal()) return out;
  out.value = res.objective_value;
  std::vector<index_t> keep;
  vector_t q = vector_t::Zero(gcount);
  for (index_t g = 0; g < gcount; ++g)
    for (index_t i = 0; i < n; ++i) q(g) += std::max(0.0, res.value(f[static_cast<std::size_t>(g * n + i)]));
  for (index_t g = 0; g < gcount; ++g)
    if (q(g) > 1e-12) keep.push_back(g);
  out.worst_case.points.resize(static_cast<index_t>(keep.size()), w);
  out.worst_case.weights.resize(static_cast<index_t>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.worst_case.points.row(static_cast<index_t>(k)) = grid.row(keep[k]);
    out.worst_case.weights(static_cast<index_t>(k)) = q(keep[k]);
  }
  out.worst_case.weights /= out.worst_case.weights.sum();
  return out;
}

}  // namespace cdro
