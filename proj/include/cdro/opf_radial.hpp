#pragma once

#include "cdro/core_model.hpp"
#include "cdro/lp/model.hpp"
#include "cdro/wce.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cdro {

/** Power in p.u. on the feeder base; costs in $/MWh */
struct RadialNode {
  double dP = 0.0, dQ = 0.0;
  bool controllable = false;  // root is always controllable
  double gPmin = 0.0, gPmax = 0.0, gQmin = 0.0, gQmax = 0.0;
  double vmin = 0.95, vmax = 1.05;
  double cost = 0.0;
};

/** Line feeding node `to` from its parent `from` */
struct RadialLine {
  index_t from = 0;
  index_t to = 0;
  double R = 0.0, X = 0.0;
  double fbar = 0.0;
};

struct RadialWind {
  index_t node = 0;
  double capacity = 0.0;  // p.u.
  double forecast = 0.0;  // per-unit of capacity
  double q_ratio = 0.0;   // reactive deviation per active deviation
};

struct RadialNetwork {
  std::vector<RadialNode> nodes;  // node 0 is the root
  std::vector<RadialLine> lines;
  std::vector<RadialWind> wind;
  double base_mva = 1.0;

  // filled by build_topology()
  std::vector<index_t> line_into;                   // per node, -1 at the root
  std::vector<std::vector<index_t>> downstream;     // per line: nodes of the subtree it feeds
  std::vector<std::vector<index_t>> root_path;      // per node: lines from the root
  std::vector<index_t> controllable;                // root first

  /** Checks the tree shape and fills the topology maps; throws InvalidArgument otherwise */
  void build_topology();
  index_t size() const { return static_cast<index_t>(nodes.size()); }
};

void validate(const RadialNetwork& net);

RadialNetwork read_radial_network(const std::string& path);
void write_radial_network(const RadialNetwork& net, const std::string& path);

/** 15-node feeder with two 1 MW units and two wind units totalling 1 MW */
RadialNetwork make_feeder15();

struct SocMode {
  bool cone = false;
  int segments = 32;
  static SocMode polygon(int k) { return {false, k}; }
  static SocMode second_order_cone() { return {true, 0}; }
};

/** Inscribed k-gon: vertices at angles 2 pi m / k on the circle of radius fbar, so every point is within the limit */
std::vector<lp::Row> polygonal_soc(double fbar, int k, lp::Var fP, lp::Var fQ, lp::ModelBuilder& model);
std::vector<lp::Row> polygonal_soc(double fbar, int k, const lp::LinExpr& fP, const lp::LinExpr& fQ,
                                   lp::ModelBuilder& model);

struct RadialOpfSettings {
  AmbiguitySpec spec;
  double eps_gen_up = 0.05;
  double eps_gen_dn = 0.05;
  double eps_volt_up = 0.05;
  double eps_volt_dn = 0.05;
  SocMode soc = SocMode::polygon(32);
  WceOptions wce;
};

struct RadialOpfModel {
  RadialNetwork net;
  UncertaintyDataset ds;
  SupportPolytope support;
  RadialOpfSettings settings;
  lp::ModelBuilder model;
  std::unique_ptr<WceContext> wce;
  std::vector<lp::Var> gP, gQ;          // per controllable unit
  std::vector<lp::Var> fP, fQ;          // per line
  std::vector<lp::Var> u;               // per node
  std::vector<std::vector<lp::Var>> V;  // [controllable][w]
  lp::LinExpr day_ahead_cost;
  WceBlock recourse;
  std::vector<DrccHandle> drcc;
  std::vector<lp::Var> cone_aux;  // cone mode: fbar-fixed head variables
  double build_time = 0.0;
};

std::unique_ptr<RadialOpfModel> build_lindistflow_opf(const RadialNetwork& net, const UncertaintyDataset& ds,
                                                      const RadialOpfSettings& settings);

struct RadialSolution {
  lp::SolveStatus status = lp::SolveStatus::numeric_failure;
  vector_t gP, gQ;  // per node (zero where not controllable)
  vector_t fP, fQ;  // per line
  vector_t u;       // per node
  matrix_t V;       // nodes x W, response per unit of system-base deviation
  double objective = 0.0;
  double day_ahead_cost = 0.0;
  double recourse_cost = 0.0;
  double wall_time = 0.0;
  double build_time = 0.0;
  int rounds = 0;
  std::string message;

  bool optimal() const { return status == lp::SolveStatus::optimal; }
};

RadialSolution solve_radial(RadialOpfModel& m, const lp::LpBackend& backend, const lp::SolveOptions& options = {});

struct RealTimeState {
  vector_t gP, gQ, fP, fQ, u;
};

/** Affine real-time state for a per-unit deviation vector xi (farm capacity units) */
RealTimeState realtime_state(const RadialSolution& sol, const RadialNetwork& net, const vector_t& xi);

struct RadialResiduals {
  double root_voltage = 0.0;
  double balance = 0.0;    // root and line flow definitions
  double voltage = 0.0;    // recursion
  double participation = 0.0;

  double max() const;
};

RadialResiduals radial_residuals(const RadialNetwork& net, const UncertaintyDataset& ds, const RadialSolution& sol);

/** Largest violation of generator and voltage limits over the rows of `points` */
double radial_scenario_violation(const RadialNetwork& net, const RadialSolution& sol, const matrix_t& points);

}  // namespace cdro
