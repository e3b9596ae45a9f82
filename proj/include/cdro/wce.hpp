#pragma once

#include "cdro/copula_relaxation.hpp"
#include "cdro/core_model.hpp"
#include "cdro/lp/model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace cdro {

/**
 * projected: the inner relaxed CDF system is replaced by its exact projection onto (xi_k, Z_k),
 *            one support row per polygon vertex.
 * full_dual: the inner McCormick LP over (xi, z, t, sigma, pi, v) is dualized row by row.
 * Both give the same optimal value.
 */
enum class CopulaForm { projected, full_dual };

const char* to_string(CopulaForm f);
CopulaForm parse_copula_form(const std::string& s);

struct WceOptions {
  CopulaForm form = CopulaForm::projected;
  bool lazy = false;                   // projected only: vertex rows generated on demand
  std::optional<double> sigma_bound;   // default_sigma_bound() when absent
};

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

/** Adds w with the four standard envelope rows for w = x y over the box; returns w */
lp::Var mccormick_envelope(lp::ModelBuilder& model, lp::Var x, lp::Var y, Bounds xb, Bounds yb);

/** Multiplier handles of one dualized inner LP */
struct InnerDual {
  std::vector<lp::Var> multipliers;  // one per inner row (bounds included), mu >= 0 or free
  lp::LinExpr value;                 // h^T mu
};

/** Handles of one affine piece across samples */
struct PieceHandles {
  bool certain = false;                              // a == 0: reduced to y_i >= b
  std::vector<lp::Var> a_proxy;                      // per k; invalid when a_k has <= 1 term
  std::vector<std::vector<lp::Var>> zeta1, zeta2;    // [i][k]
  std::vector<std::vector<lp::Var>> gamma;           // metric ball: [i][2W] support multipliers
  std::vector<std::vector<lp::Var>> s;               // projected: [i][k] support-function epigraph
  std::vector<lp::Row> y_rows;                       // [i]
  std::vector<std::vector<InnerDual>> inner;         // full_dual: [i][k]
};

/** Projected copula rows: [piece][i][k] -> (row, hull vertex index); grows under lazy generation */
struct VertexRowLog {
  std::vector<std::vector<std::vector<std::vector<std::pair<lp::Row, index_t>>>>> rows;
};

struct WceBlock {
  lp::Var alpha;
  std::optional<lp::Var> beta;
  std::vector<lp::Var> y;
  std::vector<PieceHandles> pieces;
  lp::LinExpr objective_contribution;
  double vbar = 0.0;  // 0 for the metric ball
  CopulaForm form = CopulaForm::projected;
  std::shared_ptr<VertexRowLog> vertex_rows;  // projected copula form only
};

struct DrccSpec {
  std::vector<AffineUncertainExpression> pieces;
  double epsilon = 0.05;
};

struct DrccHandle {
  lp::Var tau;
  WceBlock block;
  lp::Row row;  // eps tau + block value <= 0
};

class VertexCutGenerator;

/**
 * Builds worst-case expectation blocks for one model, dataset, support and ambiguity spec.
 * Copula polygons are computed once and shared by every block.
 */
class WceContext {
 public:
  WceContext(lp::ModelBuilder& model, const UncertaintyDataset& ds, const SupportPolytope& sp,
             const AmbiguitySpec& spec, WceOptions options = {});

  /** Pointwise maximum of the pieces; returns the block whose contribution bounds the worst case */
  WceBlock add_block(const std::vector<AffineUncertainExpression>& pieces);
  DrccHandle add_drcc(const DrccSpec& drcc);

  double sigma_bound() const { return vbar_; }
  bool sigma_bound_covers() const { return covers_; }
  /** Null for the metric ball */
  const CopulaRelaxation* relaxation() const { return rel_.get(); }
  const AmbiguitySpec& spec() const { return spec_; }
  const UncertaintyDataset& dataset() const { return ds_; }

 private:
  lp::LinExpr coefficient(PieceHandles& ph, const AffineUncertainExpression& e, index_t k);
  void add_metric_piece(WceBlock& blk, PieceHandles& ph, const AffineUncertainExpression& e);
  void add_projected_piece(WceBlock& blk, PieceHandles& ph, const AffineUncertainExpression& e);
  void add_full_dual_piece(WceBlock& blk, PieceHandles& ph, const AffineUncertainExpression& e);
  void add_dual_norm(lp::Var bound, const std::vector<lp::LinExpr>& zeta);
  void build_inner_templates();

  lp::ModelBuilder& model_;
  const UncertaintyDataset& ds_;
  SupportPolytope sp_;
  AmbiguitySpec spec_;
  WceOptions options_;
  double vbar_ = 0.0;
  bool covers_ = true;
  std::shared_ptr<const CopulaRelaxation> rel_;
  std::shared_ptr<VertexCutGenerator> cuts_;
  struct InnerTemplate {
    lp::ModelBuilder model;
    lp::Var xi;
    std::vector<lp::Var> z;
  };
  std::vector<InnerTemplate> inner_;  // full_dual: one per coordinate, shared across samples
};

WceBlock reformulate_wce_m1(const AffineUncertainExpression& expr, const UncertaintyDataset& ds,
                            const SupportPolytope& sp, double theta1, lp::ModelBuilder& model,
                            GroundNorm norm = GroundNorm::one_norm);

WceBlock reformulate_wce_m2(const AffineUncertainExpression& expr, const UncertaintyDataset& ds,
                            const SupportPolytope& sp, const AmbiguitySpec& spec, double vbar,
                            lp::ModelBuilder& model, WceOptions options = {});

DrccHandle cvar_drcc(const DrccSpec& drcc, const UncertaintyDataset& ds, const SupportPolytope& sp,
                     const AmbiguitySpec& spec, lp::ModelBuilder& model, WceOptions options = {});

/**
 * Dualizes max_w c(x)^T w s.t. inner rows and bounds into the outer model: adds one multiplier per
 * inner row or finite bound, the stationarity rows A^T mu = c(x), and returns h^T mu.
 */
InnerDual dualize_inner_max(lp::ModelBuilder& outer, const lp::ModelBuilder& inner,
                            const std::vector<lp::LinExpr>& inner_objective);

/** Where the relaxed worst case sits relative to the graph of the empirical CDF */
struct RelaxationDiagnostics {
  double max_graph_gap = 0.0;     // max |Z - F(xi)| over active (piece, sample, coordinate) points
  bool integral = true;           // every active point on the graph within 1e-9
  std::vector<point2_t> points;   // active (xi, Z) points
  std::vector<index_t> coordinate;
};

/** Needs a projected copula block and the row duals of an optimal solve */
RelaxationDiagnostics diagnose_relaxation(const WceBlock& block, const CopulaRelaxation& rel,
                                          const lp::SolveResult& result);

}  // namespace cdro
