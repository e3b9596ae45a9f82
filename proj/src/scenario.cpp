#include "cdro/scenario.hpp"

#include "cdro/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace cdro {

double Marginal::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (family == Family::beta) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return boost::math::ibeta_inv(p1, p2, u);
  }
  boost::math::normal_distribution<double> nd(p1, p2);
  const double lo = boost::math::cdf(nd, 0.0), hi = boost::math::cdf(nd, 1.0);
  const double q = std::clamp(lo + u * (hi - lo), 1e-300, 1.0 - 1e-16);
  return std::clamp(boost::math::quantile(nd, q), 0.0, 1.0);
}

std::string Marginal::describe() const {
  std::ostringstream os;
  os << (family == Family::beta ? "beta(" : "truncated_gaussian(") << format_double(p1) << ',' << format_double(p2)
     << ')';
  return os.str();
}

Marginal parse_marginal(const std::string& s) {
  auto open = s.find('('), comma = s.find(','), close = s.find(')');
  if (open == std::string::npos || comma == std::string::npos || close == std::string::npos || comma < open ||
      close < comma)
    throw ConfigError("marginal must look like beta(a,b) or truncated_gaussian(m,s), got '" + s + "'");
  const std::string name = s.substr(0, open);
  const double p1 = parse_double(s.substr(open + 1, comma - open - 1));
  const double p2 = parse_double(s.substr(comma + 1, close - comma - 1));
  if (!(p2 > 0.0) || !std::isfinite(p1)) throw ConfigError("marginal parameters out of range in '" + s + "'");
  if (name == "beta") {
    if (!(p1 > 0.0)) throw ConfigError("beta parameters must be positive in '" + s + "'");
    return Marginal::beta(p1, p2);
  }
  if (name == "truncated_gaussian") return Marginal::truncated_gaussian(p1, p2);
  throw ConfigError("unknown marginal family '" + name + "'");
}

matrix_t equicorrelation(index_t dim, double rho) {
  matrix_t c = matrix_t::Constant(dim, dim, rho);
  c.diagonal().setOnes();
  return c;
}

void validate_correlation(const matrix_t& corr) {
  if (corr.rows() != corr.cols() || corr.rows() < 1) throw DimensionError("correlation matrix must be square");
  if ((corr - corr.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("correlation matrix is not symmetric");
  if ((corr.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
    throw InvalidArgument("correlation matrix needs a unit diagonal");
  Eigen::SelfAdjointEigenSolver<matrix_t> es(corr, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw InvalidArgument("correlation matrix is not positive semidefinite (smallest eigenvalue " +
                          format_double(es.eigenvalues().minCoeff()) + ")");
}

namespace {

matrix_t correlation_factor(const matrix_t& corr) {
  Eigen::LLT<matrix_t> llt(corr);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // singular but PSD: symmetric square root
  Eigen::SelfAdjointEigenSolver<matrix_t> es(corr);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

UncertaintyDataset sample_gaussian_copula(const GeneratorSpec& spec) {
  validate_correlation(spec.copula_correlation);
  if (spec.count < 2) throw InvalidArgument("generator needs at least 2 samples");
  const index_t w = spec.dim(), n = spec.count;
  if (spec.capacities.size() != 0 && spec.capacities.size() != w)
    throw DimensionError("generator has " + std::to_string(w) + " farms but " +
                         std::to_string(spec.capacities.size()) + " capacities");
  const matrix_t fac = correlation_factor(spec.copula_correlation);
  std::mt19937_64 rng(spec.seed);
  matrix_t levels(n, w);
  vector_t z(w);
  bool have_spare = false;
  double spare = 0.0;
  auto normal = [&]() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = 1.0 - unit_draw(rng), u2 = unit_draw(rng);
    const double r = std::sqrt(-2.0 * std::log(u1)), a = 2.0 * std::numbers::pi * u2;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a);
  };
  for (index_t i = 0; i < n; ++i) {
    for (index_t k = 0; k < w; ++k) z(k) = normal();
    const vector_t x = fac * z;
    for (index_t k = 0; k < w; ++k) levels(i, k) = spec.marginal.quantile(0.5 * std::erfc(-x(k) / std::sqrt(2.0)));
  }
  UncertaintyDataset ds;
  ds.forecast = levels.colwise().mean().transpose();
  ds.deviations = levels.rowwise() - ds.forecast.transpose();
  // rounding can push mu + xi a hair outside [0, 1]
  for (index_t k = 0; k < w; ++k)
    ds.deviations.col(k) = ds.deviations.col(k).cwiseMax(-ds.forecast(k)).cwiseMin(1.0 - ds.forecast(k));
  ds.capacities = spec.capacities.size() ? spec.capacities : vector_t::Ones(w);
  ds.metadata["seed"] = std::to_string(spec.seed);
  ds.metadata["marginal"] = spec.marginal.describe();
  std::ostringstream corr;
  for (index_t r = 0; r < w; ++r)
    for (index_t c = 0; c < w; ++c) corr << (r || c ? ";" : "") << format_double(spec.copula_correlation(r, c));
  ds.metadata["copula_correlation"] = corr.str();
  ds.metadata["copula"] = "gaussian";
  return ds;
}

std::pair<UncertaintyDataset, UncertaintyDataset> split_dataset(const UncertaintyDataset& ds, index_t n_in,
                                                                std::uint64_t seed) {
  const index_t n = ds.sample_count();
  if (n_in < 1 || n_in >= n)
    throw InvalidArgument("in-sample size " + std::to_string(n_in) + " must lie in [1, " + std::to_string(n - 1) + "]");
  std::vector<index_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the order does not depend on the standard library
  for (index_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<index_t>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  auto part = [&](index_t from, index_t to) {
    UncertaintyDataset out;
    out.deviations.resize(to - from, ds.dim());
    for (index_t r = from; r < to; ++r) out.deviations.row(r - from) = ds.deviations.row(perm[static_cast<std::size_t>(r)]);
    out.forecast = ds.forecast;
    out.capacities = ds.capacities;
    out.metadata = ds.metadata;
    out.metadata["split_seed"] = std::to_string(seed);
    return out;
  };
  return {part(0, n_in), part(n_in, n)};
}

double pearson(const vector_t& x, const vector_t& y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("pearson needs two equal-length vectors");
  const vector_t a = x.array() - x.mean(), b = y.array() - y.mean();
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

namespace {
vector_t average_ranks(const vector_t& x) {
  const index_t n = x.size();
  std::vector<index_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](index_t a, index_t b) { return x(a) < x(b); });
  vector_t r(n);
  for (index_t s = 0; s < n;) {
    index_t e = s;
    while (e + 1 < n && x(idx[static_cast<std::size_t>(e + 1)]) == x(idx[static_cast<std::size_t>(s)])) ++e;
    for (index_t t = s; t <= e; ++t) r(idx[static_cast<std::size_t>(t)]) = 0.5 * static_cast<double>(s + e) + 1.0;
    s = e + 1;
  }
  return r;
}
}  // namespace

double spearman(const vector_t& x, const vector_t& y) { return pearson(average_ranks(x), average_ranks(y)); }

}  // namespace cdro
