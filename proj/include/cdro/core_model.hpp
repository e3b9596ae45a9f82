#pragma once

#include "cdro/lp/model.hpp"
#include "cdro/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cdro {

/** Per-unit deviation samples (rows) with forecast and installed capacity per farm */
struct UncertaintyDataset {
  matrix_t deviations;  // N x W
  vector_t forecast;    // W, per-unit
  vector_t capacities;  // W, MW
  std::map<std::string, std::string> metadata;

  index_t sample_count() const { return deviations.rows(); }
  index_t dim() const { return deviations.cols(); }
};

/** Box support {xi : C xi <= D} with C = [I; -I] and D = [xi_max; -xi_min] */
struct SupportPolytope {
  matrix_t C;
  vector_t D;
  vector_t xi_min;
  vector_t xi_max;

  static SupportPolytope box(const vector_t& xi_min, const vector_t& xi_max);
  /** xi in [-mu, 1 - mu] */
  static SupportPolytope for_forecast(const vector_t& mu);
  index_t dim() const { return xi_min.size(); }
};

enum class GroundNorm { one_norm, inf_norm };

const char* to_string(GroundNorm n);
GroundNorm parse_ground_norm(const std::string& s);

template <typename Derived>
typename Derived::Scalar ground_distance(const Eigen::MatrixBase<Derived>& diff, GroundNorm norm) {
  return norm == GroundNorm::one_norm ? diff.template lpNorm<1>() : diff.template lpNorm<Eigen::Infinity>();
}

struct AmbiguitySpec {
  double theta1 = 0.0;
  std::optional<double> theta2;  // absent: metric ball only
  GroundNorm ground_norm = GroundNorm::one_norm;

  bool copula() const { return theta2.has_value(); }
};

void validate(const AmbiguitySpec& spec);

/** a(x)^T xi + b(x), coefficients affine in decision handles */
struct AffineUncertainExpression {
  std::vector<lp::LinExpr> a;
  lp::LinExpr b;

  index_t dim() const { return static_cast<index_t>(a.size()); }
  bool certain() const;
  static AffineUncertainExpression fixed(const vector_t& a, double b);
};

struct DiscreteDistribution {
  matrix_t points;   // M x W
  vector_t weights;  // M

  static DiscreteDistribution empirical(const matrix_t& samples);
};

inline constexpr double kWeightTol = 1e-9;

void validate(const DiscreteDistribution& dist);

struct Violation {
  enum class Kind { below_support, above_support, forecast_range, capacity, non_finite };
  Kind kind;
  index_t row;  // -1 for per-farm checks
  index_t col;
  double value;
  double bound;

  std::string describe() const;
  bool operator==(const Violation&) const = default;
};

/** Throws DimensionError when the dataset and support disagree on |W| */
std::vector<Violation> validate_dataset(const UncertaintyDataset& ds, const SupportPolytope& sp);

/** Throws InvalidArgument listing the first violations, if any */
void require_valid(const UncertaintyDataset& ds, const SupportPolytope& sp);

/** CSV with header w1..wW plus sidecar <csv>.meta holding forecast=, capacities= and extra keys */
void write_dataset(const UncertaintyDataset& ds, const std::string& csv_path);
UncertaintyDataset read_dataset(const std::string& csv_path);

/** Shortest decimal form that parses back to the same double */
std::string format_double(double v);
double parse_double(const std::string& s);
std::string format_vector(const vector_t& v);
vector_t parse_vector(const std::string& s);

}  // namespace cdro
