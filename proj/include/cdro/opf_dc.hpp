#pragma once

#include "cdro/core_model.hpp"
#include "cdro/lp/model.hpp"
#include "cdro/wce.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cdro {

struct DcGenerator {
  std::string name;
  index_t node = 0;      // 0-based bus index
  double cost = 0.0;     // $/MWh
  double cost_up = 0.0;  // $/MW upward reserve
  double cost_dn = 0.0;  // $/MW downward reserve
  double gmin = 0.0;
  double gmax = 0.0;
  double rmax = 0.0;
};

struct DcLoad {
  index_t node = 0;
  double demand = 0.0;  // MW
};

struct DcLine {
  index_t from = 0;
  index_t to = 0;
  double reactance = 0.0;  // p.u.
  double fmax = 0.0;       // MW
};

struct DcWind {
  index_t node = 0;
  double capacity = 0.0;  // MW
  double forecast = 0.0;  // per-unit
};

/** Meshed network; PTDF rows follow the line order, positive from -> to */
struct DcNetwork {
  index_t buses = 1;
  index_t slack = 0;
  std::vector<DcGenerator> generators;
  std::vector<DcLoad> loads;
  std::vector<DcLine> lines;
  std::vector<DcWind> wind;
  matrix_t ptdf_gen;   // F x P
  matrix_t ptdf_wind;  // F x W
  matrix_t ptdf_load;  // F x D

  vector_t demand() const;
  vector_t wind_capacity() const;
  /** Fills the three PTDF blocks from reactances and the slack bus */
  void compute_ptdf();
};

/** Throws InvalidArgument on broken invariants, DimensionError on PTDF shape mismatches */
void validate(const DcNetwork& net);

/** Bus-level PTDF (F x buses) for a connected network */
matrix_t bus_ptdf(index_t buses, const std::vector<DcLine>& lines, index_t slack);

DcNetwork read_dc_network(const std::string& path);
void write_dc_network(const DcNetwork& net, const std::string& path);

/**
 * 24-bus reliability-test-system analogue: 12 units totalling 2362.5 MW with 798 MW of reserve
 * capability, 17 loads totalling 2207 MW, 34 lines, and `farms` wind farms sharing 1000 MW.
 */
DcNetwork make_rts24(index_t farms = 2);

struct DcOpfSettings {
  AmbiguitySpec spec;
  double eps_up = 0.05;
  double eps_dn = 0.05;
  double eps_line = 0.05;
  bool line_lower_drcc = true;  // reverse-flow limit alongside f <= fmax
  WceOptions wce;
};

/** Model plus handles; owns copies of everything the model refers to */
struct DcOpfModel {
  DcNetwork net;
  UncertaintyDataset ds;
  SupportPolytope support;
  DcOpfSettings settings;
  lp::ModelBuilder model;
  std::unique_ptr<WceContext> wce;
  std::vector<lp::Var> g, r_up, r_dn;
  std::vector<std::vector<lp::Var>> V;  // [p][w]
  lp::LinExpr day_ahead_cost;
  WceBlock recourse;
  std::vector<DrccHandle> drcc_up, drcc_dn, drcc_line_up, drcc_line_dn;
  double build_time = 0.0;
};

std::unique_ptr<DcOpfModel> build_dc_opf(const DcNetwork& net, const UncertaintyDataset& ds,
                                         const DcOpfSettings& settings);

struct DayAheadSolution {
  lp::SolveStatus status = lp::SolveStatus::numeric_failure;
  vector_t g, r_up, r_dn;
  matrix_t V;  // P x W, MW per per-unit deviation
  double objective = 0.0;
  double day_ahead_cost = 0.0;
  double recourse_cost = 0.0;  // worst-case expectation term
  double wall_time = 0.0;
  double build_time = 0.0;
  int rounds = 0;
  std::string message;

  bool optimal() const { return status == lp::SolveStatus::optimal; }
};

DayAheadSolution solve_day_ahead(DcOpfModel& m, const lp::LpBackend& backend, const lp::SolveOptions& options = {});

/** Largest violation of each structural invariant */
struct DcResiduals {
  double gen_bounds = 0.0;
  double reserve_bounds = 0.0;
  double day_ahead_balance = 0.0;
  double participation = 0.0;

  double max() const;
};

DcResiduals dc_residuals(const DcNetwork& net, const UncertaintyDataset& ds, const DayAheadSolution& sol);

/** Largest violation of reserve and line limits over the rows of `points` (MW, 0 when all hold) */
double dc_scenario_violation(const DcNetwork& net, const UncertaintyDataset& ds, const DayAheadSolution& sol,
                             const matrix_t& points);

}  // namespace cdro
