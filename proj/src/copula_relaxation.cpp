#include "cdro/copula_relaxation.hpp"

#include "cdro/empirical.hpp"
#include "cdro/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cdro {
namespace {

double cross(const point2_t& o, const point2_t& a, const point2_t& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; drops collinear points.
std::vector<point2_t> convex_hull(std::vector<point2_t> pts) {
  std::sort(pts.begin(), pts.end(), [](const point2_t& a, const point2_t& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const point2_t& a, const point2_t& b) {
              return std::fabs(a.x() - b.x()) <= 1e-15 && std::fabs(a.y() - b.y()) <= 1e-15;
            }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<point2_t> h(2 * pts.size());
  std::size_t k = 0;
  const double eps = 1e-14;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= eps) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= eps) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double lower_at(const vector_t& s, double xi_min, double xi_max, double vbar, double xi) {
  const double n = static_cast<double>(s.size()), span = xi_max - xi_min;
  double acc = 0.0;
  for (index_t j = 0; j < s.size(); ++j)
    acc += std::max(0.0, 1.0 / n - vbar * (xi_max - xi) * std::max(0.0, s(j) - xi_min) / span);
  return acc;
}

}  // namespace

double CopulaFiber::upper(double xi) const {
  const double n = static_cast<double>(samples.size());
  double acc = 0.0;
  for (index_t j = 0; j < samples.size(); ++j) {
    double s = samples(j) - xi_min;
    acc += s <= 0.0 ? 1.0 : std::min(1.0, (xi - xi_min) / s);
  }
  return acc / n;
}

double CopulaFiber::lower(double xi) const { return lower_at(samples, xi_min, xi_max, vbar, xi); }

double CopulaFiber::cdf(double xi) const { return empirical_cdf_value(samples, xi); }

index_t CopulaFiber::support_vertex(const point2_t& dir) const {
  index_t best = 0;
  double val = -kInf;
  for (std::size_t m = 0; m < hull.size(); ++m) {
    double v = dir.dot(hull[m]);
    if (v > val) {
      val = v;
      best = static_cast<index_t>(m);
    }
  }
  return best;
}

double sigma_cover_bound(const vector_t& samples, double xi_min, double xi_max, bool* complete) {
  if (samples.size() == 0) throw InvalidArgument("cover bound of an empty sample");
  if (!(xi_max > xi_min)) throw InvalidArgument("cover bound needs xi_min < xi_max");
  const double n = static_cast<double>(samples.size());
  std::vector<double> s(samples.data(), samples.data() + samples.size());
  std::sort(s.begin(), s.end());
  // (xi, F just below xi) pairs that lower() must not exceed
  std::vector<std::pair<double, double>> checks;
  checks.emplace_back(xi_min, empirical_cdf_value(samples, xi_min));
  bool full = true;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j > 0 && s[j] == s[j - 1]) continue;
    if (s[j] <= xi_min) continue;
    if (s[j] >= xi_max) {
      full = false;
      continue;
    }
    checks.emplace_back(s[j], static_cast<double>(j) / n);
  }
  if (complete) *complete = full;
  auto ok = [&](double vbar) {
    for (const auto& [xi, f] : checks)
      if (lower_at(samples, xi_min, xi_max, vbar, xi) > f + 1e-15) return false;
    return true;
  };
  double lo = 1e-12, hi = 1e12;
  if (ok(lo)) return lo;
  if (!ok(hi)) throw InvalidArgument("empirical CDF cannot be covered by the relaxation");
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    double mid = std::sqrt(lo * hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double default_sigma_bound(const UncertaintyDataset& ds, const SupportPolytope& sp, bool* complete) {
  double vbar = 10.0 / static_cast<double>(ds.sample_count());
  bool all = true;
  for (index_t k = 0; k < ds.dim(); ++k) {
    bool c = true;
    vbar = std::max(vbar, sigma_cover_bound(ds.deviations.col(k), sp.xi_min(k), sp.xi_max(k), &c));
    all = all && c;
  }
  if (complete) *complete = all;
  return vbar;
}

CopulaFiber make_copula_fiber(const vector_t& samples, double xi_min, double xi_max, double vbar) {
  if (!(vbar > 0.0)) throw InvalidArgument("sigma bound must be positive");
  if (!(xi_max > xi_min)) throw InvalidArgument("copula relaxation needs xi_min < xi_max");
  CopulaFiber f;
  f.xi_min = xi_min;
  f.xi_max = xi_max;
  f.vbar = vbar;
  f.samples = samples;
  const double n = static_cast<double>(samples.size()), span = xi_max - xi_min;

  std::vector<double> xs{xi_min, xi_max};
  for (index_t j = 0; j < samples.size(); ++j) {
    double s = samples(j) - xi_min;
    if (samples(j) > xi_min && samples(j) < xi_max) xs.push_back(samples(j));
    if (s > 0.0) {
      double kink = xi_max - span / (n * vbar * s);
      if (kink > xi_min && kink < xi_max) xs.push_back(kink);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  // U - L is concave and linear between candidates; add the ends of {U >= L}
  std::vector<double> cand;
  for (std::size_t m = 0; m < xs.size(); ++m) {
    cand.push_back(xs[m]);
    if (m + 1 == xs.size()) break;
    double h0 = f.upper(xs[m]) - f.lower(xs[m]), h1 = f.upper(xs[m + 1]) - f.lower(xs[m + 1]);
    if ((h0 < 0.0) != (h1 < 0.0)) cand.push_back(xs[m] + (xs[m + 1] - xs[m]) * h0 / (h0 - h1));
  }
  std::vector<point2_t> pts;
  for (double x : cand) {
    double u = f.upper(x), l = f.lower(x);
    if (u < l - 1e-12) continue;
    pts.emplace_back(x, std::min(l, u));
    pts.emplace_back(x, std::max(l, u));
  }
  if (pts.empty()) throw InvalidArgument("relaxed CDF system is empty; increase the sigma bound");
  f.hull = convex_hull(std::move(pts));
  return f;
}

CopulaRelaxation make_copula_relaxation(const UncertaintyDataset& ds, const SupportPolytope& sp, double vbar) {
  CopulaRelaxation rel;
  rel.vbar = vbar;
  rel.pseudo = copula_pseudo_observations(ds);
  for (index_t k = 0; k < ds.dim(); ++k)
    rel.fibers.push_back(make_copula_fiber(ds.deviations.col(k), sp.xi_min(k), sp.xi_max(k), vbar));
  return rel;
}

}  // namespace cdro
