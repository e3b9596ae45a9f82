#include "cdro/experiment.hpp"

#include "cdro/errors.hpp"
#include "cdro/opf_dc.hpp"
#include "cdro/opf_radial.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

namespace cdro {

const char* to_string(NetworkModel m) { return m == NetworkModel::dc ? "dc" : "radial"; }
const char* to_string(AmbiguityKind a) { return a == AmbiguityKind::m1 ? "m1" : "m2"; }

namespace {

constexpr const char* kBuiltinRts = "builtin:rts24";
constexpr const char* kBuiltinFeeder = "builtin:feeder15";

std::vector<index_t> to_index(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "" : format_double(v)); }

}  // namespace

ExperimentConfig parse_experiment_config(const KeyValueConfig& kv) {
  ExperimentConfig c;
  const auto model = kv.get_string("model", "dc");
  if (model == "dc") c.model = NetworkModel::dc;
  else if (model == "radial") c.model = NetworkModel::radial;
  else throw ConfigError(kv.source() + ": field 'model': expected dc or radial, got '" + model + "'");
  const auto amb = kv.get_string("ambiguity", "m2");
  if (amb == "m1") c.ambiguity = AmbiguityKind::m1;
  else if (amb == "m2") c.ambiguity = AmbiguityKind::m2;
  else throw ConfigError(kv.source() + ": field 'ambiguity': expected m1 or m2, got '" + amb + "'");
  c.theta1 = kv.get_double_list("theta1");
  if (kv.has("theta2")) c.theta2 = kv.get_double_list("theta2");
  if (kv.has("epsilon")) c.epsilon = kv.get_double_list("epsilon");
  if (kv.has("n_in")) c.n_in = to_index(kv.get_int_list("n_in"));
  if (kv.has("farms")) c.farms = to_index(kv.get_int_list("farms"));
  c.split_seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  c.network = kv.get_string("network", c.model == NetworkModel::dc ? kBuiltinRts : kBuiltinFeeder);
  c.dataset = kv.get_string("dataset", "");
  c.generator.correlation = kv.get_double("generator.correlation", c.generator.correlation);
  c.generator.marginal = kv.get_string("generator.marginal", c.generator.marginal);
  c.generator.count = static_cast<index_t>(kv.get_int("generator.count", c.generator.count));
  c.generator.seed = static_cast<std::uint64_t>(kv.get_int("generator.seed", static_cast<long long>(c.generator.seed)));
  c.backend = kv.get_string("backend", c.backend);
  c.threads = static_cast<unsigned>(kv.get_int("threads", 0));
  c.grid_workers = static_cast<unsigned>(kv.get_int("grid_workers", 1));
  c.output_dir = kv.get_string("output", c.output_dir);
  try {
    c.ground_norm = parse_ground_norm(kv.get_string("ground_norm", "one_norm"));
    c.wce.form = parse_copula_form(kv.get_string("copula_form", "projected"));
  } catch (const Error& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }
  c.wce.lazy = kv.get_bool("lazy_vertex_rows", true);
  if (kv.has("sigma_bound")) c.wce.sigma_bound = kv.get_double("sigma_bound");
  c.oos.prices.voll = kv.get_double("voll", c.oos.prices.voll);
  c.oos.prices.spill = kv.get_double("spill_price", c.oos.prices.spill);
  c.oos.prices.signed_recourse = kv.get_bool("signed_recourse", false);
  c.oos.prices.period_hours = kv.get_double("period_hours", 1.0);
  c.oos.polygon_segments = static_cast<int>(kv.get_int("segments", 32));
  c.evaluate_oos = kv.get_bool("evaluate_oos", true);
  c.oos_samples = static_cast<index_t>(kv.get_int("oos_samples", 0));
  c.line_lower_drcc = kv.get_bool("line_lower_drcc", true);
  c.timing_repeats = static_cast<int>(kv.get_int("timing_repeats", 1));
  c.time_limit = kv.get_double("time_limit", kInf);
  kv.reject_unused();
  try {
    validate(c);
  } catch (const Error& e) {
    throw ConfigError(kv.source() + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(KeyValueConfig::load(path));
}

void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& m) { throw ConfigError(m); };
  if (c.theta1.empty()) bad("field 'theta1': grid is empty");
  for (double t : c.theta1)
    if (!(t >= 0.0)) bad("field 'theta1': radii must be nonnegative");
  if (c.ambiguity == AmbiguityKind::m2) {
    if (c.theta2.empty()) bad("field 'theta2': required for ambiguity m2");
    for (double t : c.theta2)
      if (!(t >= 0.0)) bad("field 'theta2': radii must be nonnegative");
  } else if (c.theta2.size() > 1 || (c.theta2.size() == 1 && !std::isinf(c.theta2.front()))) {
    bad("field 'theta2': ambiguity m1 takes no copula radius (omit it or use [inf])");
  }
  for (double e : c.epsilon)
    if (!(e > 0.0 && e < 1.0)) bad("field 'epsilon': values must lie in (0, 1)");
  for (index_t n : c.n_in)
    if (n < 1) bad("field 'n_in': values must be positive");
  for (index_t f : c.farms)
    if (f < 1) bad("field 'farms': values must be positive");
  if (c.model == NetworkModel::radial && c.network == kBuiltinRts) bad("field 'network': rts24 is a DC network");
  if (c.model == NetworkModel::dc && c.network == kBuiltinFeeder) bad("field 'network': feeder15 is a radial network");
  if (!c.farms.empty() && c.network != kBuiltinRts) bad("field 'farms': sweeps need network = \"builtin:rts24\"");
  if (!c.farms.empty() && !c.dataset.empty()) bad("field 'farms': sweeps need a generated dataset");
  if (c.generator.count < 2) bad("field 'generator.count': at least 2 samples");
  if (c.timing_repeats < 1) bad("field 'timing_repeats': at least 1");
  if (c.grid_workers < 1) bad("field 'grid_workers': at least 1");
  if (c.wce.sigma_bound && !(*c.wce.sigma_bound > 0.0)) bad("field 'sigma_bound': must be positive");
  if (c.oos.polygon_segments < 4) bad("field 'segments': at least 4");
  if (!(c.oos.prices.period_hours > 0.0)) bad("field 'period_hours': must be positive");
  parse_marginal(c.generator.marginal);
}

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg) {
  std::vector<index_t> farms = cfg.farms;
  if (farms.empty()) farms.push_back(-1);  // resolved from the data source
  std::vector<std::optional<double>> t2;
  if (cfg.ambiguity == AmbiguityKind::m2)
    for (double t : cfg.theta2) t2.emplace_back(t);
  else
    t2.emplace_back(std::nullopt);
  std::vector<GridPoint> out;
  for (index_t f : farms)
    for (index_t n : cfg.n_in)
      for (double e : cfg.epsilon)
        for (double a : cfg.theta1)
          for (const auto& b : t2) out.push_back({a, b, e, n, f});
  return out;
}

std::vector<std::pair<std::string, std::string>> run_metadata(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> m{
      {"model", to_string(c.model)},
      {"ambiguity", to_string(c.ambiguity)},
      {"network", c.network},
      {"dataset", c.dataset.empty() ? "generated" : c.dataset},
      {"generator.correlation", format_double(c.generator.correlation)},
      {"generator.marginal", c.generator.marginal},
      {"generator.count", std::to_string(c.generator.count)},
      {"generator.seed", std::to_string(c.generator.seed)},
      {"generator.copula", "gaussian"},
      {"split_seed", std::to_string(c.split_seed)},
      {"backend", c.backend},
      {"ground_norm", to_string(c.ground_norm)},
      {"copula_form", to_string(c.wce.form)},
      {"lazy_vertex_rows", c.wce.lazy ? "true" : "false"},
      {"sigma_bound", c.wce.sigma_bound ? format_double(*c.wce.sigma_bound) : "max(10/N, cover bound)"},
      {"voll", format_double(c.oos.prices.voll)},
      {"spill_price", format_double(c.oos.prices.spill)},
      {"recourse_pricing", c.oos.prices.signed_recourse ? "signed" : "absolute"},
      {"period_hours", format_double(c.oos.prices.period_hours)},
      {"segments", std::to_string(c.oos.polygon_segments)},
      {"line_lower_drcc", c.line_lower_drcc ? "true" : "false"},
      {"oos_samples", c.oos_samples == 0 ? "all" : std::to_string(c.oos_samples)},
      {"timing", "solve only, min over " + std::to_string(c.timing_repeats) + " repeats"},
  };
  return m;
}

std::string metadata_hash(const std::vector<std::pair<std::string, std::string>>& meta) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : meta) mix(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

UncertaintyDataset experiment_dataset(const ExperimentConfig& cfg, index_t farms) {
  if (!cfg.dataset.empty()) return read_dataset(cfg.dataset);
  GeneratorSpec g;
  g.copula_correlation = equicorrelation(farms, cfg.generator.correlation);
  g.marginal = parse_marginal(cfg.generator.marginal);
  g.count = cfg.generator.count;
  g.seed = cfg.generator.seed;
  return sample_gaussian_copula(g);
}

namespace {

DcNetwork dc_network(const ExperimentConfig& cfg, index_t farms) {
  return cfg.network == kBuiltinRts ? make_rts24(farms) : read_dc_network(cfg.network);
}

RadialNetwork radial_network(const ExperimentConfig& cfg) {
  return cfg.network == kBuiltinFeeder ? make_feeder15() : read_radial_network(cfg.network);
}

index_t network_farms(const ExperimentConfig& cfg) {
  if (cfg.model == NetworkModel::dc) return static_cast<index_t>(dc_network(cfg, 2).wind.size());
  return static_cast<index_t>(radial_network(cfg).wind.size());
}

AmbiguitySpec ambiguity(const ExperimentConfig& cfg, const GridPoint& p) {
  AmbiguitySpec s;
  s.theta1 = p.theta1;
  s.theta2 = p.theta2;
  s.ground_norm = cfg.ground_norm;
  return s;
}

template <class Sol>
void record_oos(PointResult& r, const OosReport& rep) {
  r.expected_cost = rep.expected_cost;
  r.std_dev = rep.std_dev;
  r.eens = rep.eens;
  r.oos_failures = rep.failures;
  r.max_violation_rate = 0.0;
  for (const auto& v : rep.violation_rates) r.max_violation_rate = std::max(r.max_violation_rate, v.rate);
}

}  // namespace

PointResult evaluate_point(const ExperimentConfig& cfg, const GridPoint& p, const UncertaintyDataset& full,
                           const lp::LpBackend& backend) {
  PointResult r;
  r.point = p;
  if (p.n_in >= full.sample_count())
    throw ConfigError("n_in = " + std::to_string(p.n_in) + " leaves no out-of-sample data in a set of " +
                      std::to_string(full.sample_count()));
  auto [in, out] = split_dataset(full, p.n_in, cfg.split_seed);
  if (cfg.oos_samples > 0 && cfg.oos_samples < out.sample_count())
    out.deviations = matrix_t(out.deviations.topRows(cfg.oos_samples));
  lp::SolveOptions opts;
  opts.time_limit = cfg.time_limit;

  if (cfg.model == NetworkModel::dc) {
    const DcNetwork net = dc_network(cfg, p.farms);
    DcOpfSettings s;
    s.spec = ambiguity(cfg, p);
    s.eps_up = s.eps_dn = s.eps_line = p.epsilon;
    s.line_lower_drcc = cfg.line_lower_drcc;
    s.wce = cfg.wce;
    DayAheadSolution sol;
    for (int k = 0; k < cfg.timing_repeats; ++k) {
      auto m = build_dc_opf(net, in, s);
      auto cur = solve_day_ahead(*m, backend, opts);
      if (m->wce->relaxation()) r.sigma_bound = m->wce->sigma_bound();
      if (k == 0 || cur.wall_time < sol.wall_time) {
        const double best_build = k == 0 ? cur.build_time : std::min(sol.build_time, cur.build_time);
        sol = std::move(cur);
        sol.build_time = best_build;
      }
    }
    r.status = lp::to_string(sol.status);
    r.solve_time = sol.wall_time;
    r.build_time = sol.build_time;
    r.rounds = sol.rounds;
    r.message = sol.message;
    if (!sol.optimal()) return r;
    r.objective = sol.objective;
    r.day_ahead_cost = sol.day_ahead_cost;
    r.recourse_cost = sol.recourse_cost;
    r.reserve_up = sol.r_up.sum();
    r.reserve_down = sol.r_dn.sum();
    if (cfg.evaluate_oos) record_oos<DayAheadSolution>(r, evaluate_out_of_sample(sol, net, out, backend, cfg.oos));
    return r;
  }

  const RadialNetwork net = radial_network(cfg);
  RadialOpfSettings s;
  s.spec = ambiguity(cfg, p);
  s.eps_gen_up = s.eps_gen_dn = s.eps_volt_up = s.eps_volt_dn = p.epsilon;
  s.soc = SocMode::polygon(cfg.oos.polygon_segments);
  s.wce = cfg.wce;
  RadialSolution sol;
  for (int k = 0; k < cfg.timing_repeats; ++k) {
    auto m = build_lindistflow_opf(net, in, s);
    auto cur = solve_radial(*m, backend, opts);
    if (m->wce->relaxation()) r.sigma_bound = m->wce->sigma_bound();
    if (k == 0 || cur.wall_time < sol.wall_time) sol = std::move(cur);
  }
  r.status = lp::to_string(sol.status);
  r.solve_time = sol.wall_time;
  r.build_time = sol.build_time;
  r.rounds = sol.rounds;
  r.message = sol.message;
  if (!sol.optimal()) return r;
  r.objective = sol.objective * net.base_mva;
  r.day_ahead_cost = sol.day_ahead_cost * net.base_mva;
  r.recourse_cost = sol.recourse_cost * net.base_mva;
  if (cfg.evaluate_oos) {
    // feeder topology is rebuilt inside the model copy; the replay needs it on this copy too
    RadialNetwork topo = net;
    topo.build_topology();
    record_oos<RadialSolution>(r, evaluate_out_of_sample(sol, topo, out, backend, cfg.oos));
  }
  return r;
}

std::string results_row(const ExperimentConfig& cfg, const PointResult& r, const std::string& hash) {
  const auto& p = r.point;
  std::string row;
  auto put = [&](const std::string& s) { row += (row.empty() ? "" : ",") + s; };
  put(to_string(cfg.model));
  put(to_string(cfg.ambiguity));
  put(format_double(p.theta1));
  put(p.theta2 ? format_double(*p.theta2) : "");
  put(format_double(p.epsilon));
  put(std::to_string(p.n_in));
  put(std::to_string(p.farms));
  put(r.status);
  for (double v : {r.objective, r.day_ahead_cost, r.recourse_cost, r.expected_cost, r.std_dev, r.eens, r.reserve_up,
                   r.reserve_down, r.max_violation_rate})
    put(fmt(v));
  put(std::to_string(r.oos_failures));
  put(fmt(r.solve_time));
  put(fmt(r.build_time));
  put(std::to_string(r.rounds));
  put(fmt(r.sigma_bound));
  put(hash);
  return row;
}

std::vector<PointResult> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto backend = lp::make_backend(cfg.backend);  // misconfiguration fails before any sweep work
  auto grid = expand_grid(cfg);
  std::map<index_t, UncertaintyDataset> data;
  std::optional<UncertaintyDataset> from_disk;
  if (!cfg.dataset.empty()) from_disk = read_dataset(cfg.dataset);
  for (auto& p : grid) {
    if (p.farms < 0) p.farms = from_disk ? from_disk->dim() : network_farms(cfg);
    if (!data.count(p.farms)) data.emplace(p.farms, from_disk ? *from_disk : experiment_dataset(cfg, p.farms));
  }
  const auto meta = run_metadata(cfg);
  const auto hash = metadata_hash(meta);
  std::filesystem::create_directories(cfg.output_dir);
  const auto csv_path = std::filesystem::path(cfg.output_dir) / "results.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << kResultsHeader << '\n';
  csv.flush();
  std::mutex writer;
  std::vector<PointResult> results(grid.size());
  parallel_for(static_cast<index_t>(grid.size()), cfg.grid_workers, [&](index_t k) {
    const auto& p = grid[static_cast<std::size_t>(k)];
    PointResult r;
    try {
      r = evaluate_point(cfg, p, data.at(p.farms), *backend);
    } catch (const SolverError& e) {
      r.point = p;
      r.status = "SOLVER_ERROR";
      r.message = e.what();
    }
    std::lock_guard lock(writer);
    csv << results_row(cfg, r, hash) << '\n';
    csv.flush();
    results[static_cast<std::size_t>(k)] = std::move(r);
  });

  nlohmann::json j;
  for (const auto& [k, v] : meta) j["metadata"][k] = v;
  j["metadata_hash"] = hash;
  j["points"] = grid.size();
  std::size_t optimal = 0;
  for (const auto& r : results) optimal += r.status == "OPTIMAL";
  j["optimal_points"] = optimal;
  for (const auto& r : results) {
    nlohmann::json row{{"theta1", r.point.theta1}, {"epsilon", r.point.epsilon}, {"n_in", r.point.n_in},
                       {"farms", r.point.farms}, {"status", r.status}};
    if (r.point.theta2) row["theta2"] = *r.point.theta2;
    if (std::isfinite(r.expected_cost)) {
      row["expected_cost"] = r.expected_cost;
      row["std_dev"] = r.std_dev;
      row["eens_mwh"] = r.eens;
    }
    if (std::isfinite(r.solve_time)) row["solve_time_s"] = r.solve_time;
    if (!r.message.empty()) row["message"] = r.message;
    j["results"].push_back(row);
  }
  std::ofstream js(std::filesystem::path(cfg.output_dir) / "run.json");
  js << j.dump(2) << '\n';
  return results;
}

}  // namespace cdro
