#include "cdro/core_model.hpp"

#include "cdro/errors.hpp"

#include <cmath>
#include <sstream>

namespace cdro {

SupportPolytope SupportPolytope::box(const vector_t& xi_min, const vector_t& xi_max) {
  if (xi_min.size() != xi_max.size())
    throw DimensionError("support bounds have sizes " + std::to_string(xi_min.size()) + " and " +
                         std::to_string(xi_max.size()));
  if ((xi_min.array() > xi_max.array()).any()) throw InvalidArgument("support requires xi_min <= xi_max");
  const index_t w = xi_min.size();
  SupportPolytope sp;
  sp.C.resize(2 * w, w);
  sp.C << matrix_t::Identity(w, w), -matrix_t::Identity(w, w);
  sp.D.resize(2 * w);
  sp.D << xi_max, -xi_min;
  sp.xi_min = xi_min;
  sp.xi_max = xi_max;
  return sp;
}

SupportPolytope SupportPolytope::for_forecast(const vector_t& mu) {
  return box(-mu, vector_t::Ones(mu.size()) - mu);
}

const char* to_string(GroundNorm n) { return n == GroundNorm::one_norm ? "one_norm" : "inf_norm"; }

GroundNorm parse_ground_norm(const std::string& s) {
  if (s == "one_norm") return GroundNorm::one_norm;
  if (s == "inf_norm") return GroundNorm::inf_norm;
  throw ConfigError("unknown ground norm '" + s + "' (expected one_norm or inf_norm)");
}

void validate(const AmbiguitySpec& spec) {
  if (!(spec.theta1 >= 0.0)) throw InvalidArgument("theta1 must be nonnegative");
  if (spec.theta2 && !(*spec.theta2 >= 0.0)) throw InvalidArgument("theta2 must be nonnegative");
}

bool AffineUncertainExpression::certain() const {
  for (const auto& e : a)
    if (!e.is_constant() || e.constant() != 0.0) return false;
  return true;
}

AffineUncertainExpression AffineUncertainExpression::fixed(const vector_t& a, double b) {
  AffineUncertainExpression e;
  for (index_t k = 0; k < a.size(); ++k) e.a.emplace_back(a(k));
  e.b = lp::LinExpr(b);
  return e;
}

DiscreteDistribution DiscreteDistribution::empirical(const matrix_t& samples) {
  if (samples.rows() == 0) throw InvalidArgument("empirical distribution needs at least one sample");
  return {samples, vector_t::Constant(samples.rows(), 1.0 / static_cast<double>(samples.rows()))};
}

void validate(const DiscreteDistribution& dist) {
  if (dist.points.rows() != dist.weights.size())
    throw DimensionError("distribution has " + std::to_string(dist.points.rows()) + " points but " +
                         std::to_string(dist.weights.size()) + " weights");
  if (dist.weights.size() == 0) throw InvalidArgument("distribution has no atoms");
  if ((dist.weights.array() < -kWeightTol).any()) throw InvalidArgument("negative probability weight");
  if (std::fabs(dist.weights.sum() - 1.0) > kWeightTol) throw InvalidArgument("probability weights do not sum to 1");
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::below_support:
      os << "row " << row << ", column " << col << ": value " << value << " below lower support bound " << bound;
      break;
    case Kind::above_support:
      os << "row " << row << ", column " << col << ": value " << value << " exceeds upper support bound " << bound;
      break;
    case Kind::forecast_range:
      os << "forecast of column " << col << " is " << value << ", outside [0, 1]";
      break;
    case Kind::capacity:
      os << "capacity of column " << col << " is " << value << ", must be positive";
      break;
    case Kind::non_finite:
      os << "row " << row << ", column " << col << ": non-finite value";
      break;
  }
  return os.str();
}

std::vector<Violation> validate_dataset(const UncertaintyDataset& ds, const SupportPolytope& sp) {
  const index_t w = ds.dim();
  if (sp.dim() != w)
    throw DimensionError("dataset has " + std::to_string(w) + " columns but support has dimension " +
                         std::to_string(sp.dim()));
  if (ds.forecast.size() != w || ds.capacities.size() != w)
    throw DimensionError("dataset has " + std::to_string(w) + " columns but forecast/capacities have sizes " +
                         std::to_string(ds.forecast.size()) + "/" + std::to_string(ds.capacities.size()));
  std::vector<Violation> out;
  using K = Violation::Kind;
  for (index_t k = 0; k < w; ++k) {
    double mu = ds.forecast(k);
    if (!(mu >= 0.0 && mu <= 1.0)) out.push_back({K::forecast_range, -1, k, mu, mu < 0.0 ? 0.0 : 1.0});
    if (!(ds.capacities(k) > 0.0)) out.push_back({K::capacity, -1, k, ds.capacities(k), 0.0});
  }
  for (index_t i = 0; i < ds.sample_count(); ++i) {
    for (index_t k = 0; k < w; ++k) {
      double v = ds.deviations(i, k);
      if (!std::isfinite(v)) out.push_back({K::non_finite, i, k, v, 0.0});
      else if (v < sp.xi_min(k)) out.push_back({K::below_support, i, k, v, sp.xi_min(k)});
      else if (v > sp.xi_max(k)) out.push_back({K::above_support, i, k, v, sp.xi_max(k)});
    }
  }
  return out;
}

void require_valid(const UncertaintyDataset& ds, const SupportPolytope& sp) {
  if (ds.sample_count() < 1 || ds.dim() < 1) throw InvalidArgument("dataset needs N >= 1 and |W| >= 1");
  auto v = validate_dataset(ds, sp);
  if (v.empty()) return;
  std::string msg = std::to_string(v.size()) + " dataset violation(s): " + v.front().describe();
  throw InvalidArgument(msg);
}

}  // namespace cdro
