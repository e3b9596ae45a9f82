#pragma once

#include "cdro/core_model.hpp"
#include "cdro/lp/model.hpp"
#include "cdro/opf_dc.hpp"
#include "cdro/opf_radial.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cdro {

struct RealTimePrices {
  double voll = 1000.0;       // $/MWh shed, also charged on DC line overload
  double spill = 0.0;         // $/MWh curtailed
  bool signed_recourse = false;  // false: c |activation|; true: c * activation (downward saves cost)
  double period_hours = 1.0;
};

/** One real-time redispatch. Units are MW and $ for both network models. */
struct RealTimeOutcome {
  lp::SolveStatus status = lp::SolveStatus::numeric_failure;
  vector_t recourse;  // per generator (DC) or per node (radial, zero where not controllable)
  vector_t shed;      // per load (DC) or per node (radial)
  vector_t curtail;   // per farm
  vector_t overload;  // DC only: per line, MW above the limit in either direction
  double cost = 0.0;
  bool optimal() const { return status == lp::SolveStatus::optimal; }
};

/**
 * DC: activation within [-r_dn, r_up], load shedding, curtailment and priced line overload keep
 * the LP feasible for every realization.
 */
RealTimeOutcome realtime_redispatch(const DayAheadSolution& sol, const DcNetwork& net, const vector_t& forecast,
                                    const vector_t& xi, const RealTimePrices& prices, const lp::LpBackend& backend);

/**
 * Radial: units move inside their physical limits around the day-ahead point, the substation
 * balances, nodal load is shed as a fraction of both P and Q demand, voltage and flow limits hold.
 * Feasible whenever every unit may reach 0 output.
 */
RealTimeOutcome realtime_redispatch(const RadialSolution& sol, const RadialNetwork& net, const vector_t& forecast,
                                    const vector_t& xi, const RealTimePrices& prices, const lp::LpBackend& backend,
                                    int polygon_segments = 32);

struct ViolationRate {
  std::string name;
  double rate = 0.0;
};

struct SampleSummary {
  index_t index = 0;
  lp::SolveStatus status = lp::SolveStatus::numeric_failure;
  double cost = 0.0;
  double shed = 0.0;
  double curtail = 0.0;
};

struct OosReport {
  double day_ahead_cost = 0.0;
  double expected_cost = 0.0;  // day-ahead cost + mean real-time cost over successes
  double std_dev = 0.0;
  double eens = 0.0;           // MWh
  std::vector<ViolationRate> violation_rates;
  std::vector<SampleSummary> per_sample;  // sorted by sample index
  index_t failures = 0;
  double wall_time = 0.0;
};

struct OosOptions {
  RealTimePrices prices;
  unsigned threads = 0;  // 0: hardware concurrency
  int polygon_segments = 32;
};

OosReport evaluate_out_of_sample(const DayAheadSolution& sol, const DcNetwork& net, const UncertaintyDataset& oos,
                                 const lp::LpBackend& backend, const OosOptions& options = {});
OosReport evaluate_out_of_sample(const RadialSolution& sol, const RadialNetwork& net, const UncertaintyDataset& oos,
                                 const lp::LpBackend& backend, const OosOptions& options = {});

/** Runs fn(i) for i in [0, count) on a bounded pool; exceptions are rethrown after all workers join */
void parallel_for(index_t count, unsigned threads, const std::function<void(index_t)>& fn);

}  // namespace cdro
