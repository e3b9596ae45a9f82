#pragma once

#include "cdro/config.hpp"
#include "cdro/core_model.hpp"
#include "cdro/oos.hpp"
#include "cdro/scenario.hpp"
#include "cdro/wce.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cdro {

enum class NetworkModel { dc, radial };
enum class AmbiguityKind { m1, m2 };

struct GeneratorSettings {
  double correlation = 0.5;
  std::string marginal = "beta(2,2)";
  index_t count = 1000;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  NetworkModel model = NetworkModel::dc;
  AmbiguityKind ambiguity = AmbiguityKind::m2;
  std::vector<double> theta1{0.1};
  std::vector<double> theta2;  // m2 only
  std::vector<double> epsilon{0.05};
  std::vector<index_t> n_in{30};
  std::vector<index_t> farms;  // empty: taken from the network or dataset
  std::uint64_t split_seed = 1;
  std::string network = "builtin:rts24";  // builtin:rts24, builtin:feeder15 or a JSON path
  std::string dataset;                    // CSV path; empty means generate
  GeneratorSettings generator;
  std::string backend = "highs";
  unsigned threads = 0;       // per-sample replay workers
  unsigned grid_workers = 1;  // grid points in flight
  std::string output_dir = "results";
  GroundNorm ground_norm = GroundNorm::one_norm;
  WceOptions wce{CopulaForm::projected, true, std::nullopt};
  OosOptions oos;
  bool evaluate_oos = true;
  index_t oos_samples = 0;  // 0: every held-out sample
  bool line_lower_drcc = true;
  int timing_repeats = 1;   // solve time is the minimum over repeats
  double time_limit = kInf;
};

/** Reads and validates; unknown fields and bad values raise ConfigError with the line */
ExperimentConfig parse_experiment_config(const KeyValueConfig& kv);
ExperimentConfig load_experiment_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

struct GridPoint {
  double theta1 = 0.0;
  std::optional<double> theta2;
  double epsilon = 0.05;
  index_t n_in = 30;
  index_t farms = 2;
};

struct PointResult {
  GridPoint point;
  std::string status;  // OPTIMAL, INFEASIBLE, ...
  double objective = kNaN;
  double day_ahead_cost = kNaN;
  double recourse_cost = kNaN;
  double expected_cost = kNaN;
  double std_dev = kNaN;
  double eens = kNaN;
  double reserve_up = kNaN;    // DC: total booked upward reserve, MW
  double reserve_down = kNaN;
  double max_violation_rate = kNaN;
  index_t oos_failures = 0;
  double solve_time = kNaN;    // around solve only
  double build_time = kNaN;
  int rounds = 0;
  double sigma_bound = kNaN;
  std::string message;
};

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg);

/** Design-decision values in force, as ordered key/value pairs */
std::vector<std::pair<std::string, std::string>> run_metadata(const ExperimentConfig& cfg);
/** FNV-1a 64 over the metadata lines, hex */
std::string metadata_hash(const std::vector<std::pair<std::string, std::string>>& meta);

/** Full dataset for a farm count: read from disk or generated */
UncertaintyDataset experiment_dataset(const ExperimentConfig& cfg, index_t farms);

PointResult evaluate_point(const ExperimentConfig& cfg, const GridPoint& p, const UncertaintyDataset& full,
                           const lp::LpBackend& backend);

inline constexpr const char* kResultsHeader =
    "model,ambiguity,theta1,theta2,epsilon,n_in,farms,status,objective,day_ahead_cost,recourse_cost,"
    "expected_cost,std_dev,eens_mwh,reserve_up_mw,reserve_down_mw,max_violation_rate,oos_failures,"
    "solve_time_s,build_time_s,rounds,sigma_bound,metadata_hash";

std::string results_row(const ExperimentConfig& cfg, const PointResult& r, const std::string& hash);

/** Runs the sweep, writes <output>/results.csv and <output>/run.json; returns the rows in grid order */
std::vector<PointResult> run_experiment(const ExperimentConfig& cfg);

const char* to_string(NetworkModel m);
const char* to_string(AmbiguityKind a);

}  // namespace cdro
