#pragma once

#include "cdro/core_model.hpp"
#include "cdro/lp/model.hpp"

namespace cdro {

struct TransportPlan {
  matrix_t flow;  // M x N
  double cost = 0.0;
};

/** Order-1 optimal transport between two discrete distributions */
TransportPlan wasserstein_distance(const DiscreteDistribution& p, const DiscreteDistribution& q, GroundNorm norm,
                                   const lp::LpBackend& backend);

/**
 * shared: one coupling carries both the xi cost and the copula cost (the set whose dual is the
 *         block reformulation).
 * separate: independent couplings for the distribution and for its copula image.
 */
enum class CouplingMode { shared, separate };

struct OracleOptions {
  index_t grid_points_per_dim = 11;
  CouplingMode coupling = CouplingMode::shared;
  bool enforce_desk_scale = true;  // |W| <= 2, N <= 5, grid <= 15
};

struct OracleResult {
  lp::SolveStatus status = lp::SolveStatus::numeric_failure;
  double value = 0.0;
  DiscreteDistribution worst_case;

  bool feasible() const { return status == lp::SolveStatus::optimal; }
};

/** Per-dimension sorted grid: uniform mesh on [xi_min, xi_max] plus every sample coordinate */
std::vector<vector_t> oracle_axes(const UncertaintyDataset& ds, const SupportPolytope& sp, index_t points_per_dim);

struct AffinePiece {
  vector_t a;
  double b = 0.0;
};

/** Max of E[a^T xi + b] over grid-supported distributions inside the ambiguity set */
OracleResult oracle_worst_case_expectation(const vector_t& a, double b, const UncertaintyDataset& ds,
                                           const SupportPolytope& sp, const AmbiguitySpec& spec,
                                           const OracleOptions& options, const lp::LpBackend& backend);

/** Same for the pointwise maximum of affine pieces */
OracleResult oracle_worst_case_expectation(const std::vector<AffinePiece>& pieces, const UncertaintyDataset& ds,
                                           const SupportPolytope& sp, const AmbiguitySpec& spec,
                                           const OracleOptions& options, const lp::LpBackend& backend);

}  // namespace cdro
