#include "cdro/config.hpp"
#include "cdro/errors.hpp"
#include "cdro/experiment.hpp"
#include "cdro/opf_dc.hpp"
#include "cdro/opf_radial.hpp"
#include "cdro/plot_data.hpp"
#include "cdro/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace {

using namespace cdro;

int cmd_run(const std::string& path, const std::string& backend, int threads, long long seed, const std::string& output) {
  auto cfg = load_experiment_config(path);
  if (!backend.empty()) cfg.backend = backend;
  if (threads >= 0) cfg.threads = static_cast<unsigned>(threads);
  if (seed >= 0) cfg.split_seed = static_cast<std::uint64_t>(seed);
  if (!output.empty()) cfg.output_dir = output;
  const auto rows = run_experiment(cfg);
  std::size_t optimal = 0;
  for (const auto& r : rows) optimal += r.status == "OPTIMAL";
  std::cout << rows.size() << " grid points, " << optimal << " optimal; results in " << cfg.output_dir
            << "/results.csv\n";
  return 0;
}

int cmd_plot(const std::string& dir) {
  for (const auto& f : emit_plot_data(dir)) std::cout << f << '\n';
  return 0;
}

int cmd_gen_data(const std::string& path, long long seed, const std::string& output) {
  const auto kv = KeyValueConfig::load(path);
  GeneratorSpec g;
  const auto farms = static_cast<index_t>(kv.get_int("farms", 2));
  if (kv.has("correlation_matrix")) {
    const auto flat = kv.get_double_list("correlation_matrix");
    if (static_cast<index_t>(flat.size()) != farms * farms)
      throw ConfigError(path + ": field 'correlation_matrix': expected " + std::to_string(farms * farms) + " entries");
    g.copula_correlation = Eigen::Map<const matrix_t>(flat.data(), farms, farms).transpose();
  } else {
    g.copula_correlation = equicorrelation(farms, kv.get_double("correlation", 0.5));
  }
  g.marginal = parse_marginal(kv.get_string("marginal", "beta(2,2)"));
  g.count = static_cast<index_t>(kv.get_int("count", 1000));
  g.seed = static_cast<std::uint64_t>(seed >= 0 ? seed : kv.get_int("seed", 1));
  if (kv.has("capacities")) {
    const auto c = kv.get_double_list("capacities");
    g.capacities = Eigen::Map<const vector_t>(c.data(), static_cast<index_t>(c.size()));
  }
  const std::string out = output.empty() ? kv.get_string("output") : output;
  if (!output.empty() && kv.has("output")) kv.get_string("output");
  kv.reject_unused();
  const auto ds = sample_gaussian_copula(g);
  write_dataset(ds, out);
  std::cout << "wrote " << ds.sample_count() << " samples x " << ds.dim() << " farms to " << out << '\n';
  return 0;
}

int cmd_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  if (j.contains("nodes")) {
    const auto net = read_radial_network(path);
    std::cout << "radial feeder: " << net.size() << " nodes, " << net.lines.size() << " lines, "
              << net.controllable.size() << " controllable (substation included), " << net.wind.size()
              << " wind units; OK\n";
    return 0;
  }
  auto net = read_dc_network(path);
  double worst = 0.0;
  if (j.contains("ptdf")) {
    // shipped PTDF blocks must match the reactances
    DcNetwork fresh = net;
    fresh.compute_ptdf();
    worst = std::max({(fresh.ptdf_gen - net.ptdf_gen).cwiseAbs().maxCoeff(),
                      (fresh.ptdf_wind - net.ptdf_wind).cwiseAbs().maxCoeff(),
                      (fresh.ptdf_load - net.ptdf_load).cwiseAbs().maxCoeff()});
  }
  validate(net);
  std::cout << "dc network: " << net.buses << " buses, " << net.lines.size() << " lines, " << net.generators.size()
            << " generators, " << net.wind.size() << " wind farms, demand " << net.demand().sum()
            << " MW; PTDF deviation " << worst << '\n';
  if (worst > 1e-8) {
    std::cerr << "PTDF blocks disagree with the line reactances\n";
    return 1;
  }
  return 0;
}

int cmd_gen_network(const std::string& which, int farms, const std::string& output) {
  if (which == "rts24") {
    write_dc_network(make_rts24(farms), output);
  } else if (which == "feeder15") {
    write_radial_network(make_feeder15(), output);
  } else {
    throw ConfigError("unknown network '" + which + "' (expected rts24 or feeder15)");
  }
  std::cout << "wrote " << output << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-aware distributionally robust dispatch experiments"};
  app.require_subcommand(1);
  std::string backend, output, path;
  int threads = -1;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "run a sweep described by a config file");
  run->add_option("config", path, "experiment config")->required();
  run->add_option("--backend", backend, "LP backend (highs, simplex)");
  run->add_option("--threads", threads, "out-of-sample replay workers (0: all cores)");
  run->add_option("--seed", seed, "dataset split seed");
  run->add_option("--output", output, "results directory");

  auto* plot = app.add_subcommand("plot-data", "emit plot-ready CSV files from a results directory");
  plot->add_option("results-dir", path, "directory holding results.csv files")->required();

  auto* gen = app.add_subcommand("gen-data", "sample a Gaussian-copula wind dataset");
  gen->add_option("generator-config", path, "generator config")->required();
  gen->add_option("--seed", seed, "override the generator seed");
  gen->add_option("-o,--output", output, "dataset CSV path");

  auto* val = app.add_subcommand("validate", "check a network file");
  val->add_option("network", path, "network JSON")->required();

  std::string which;
  int farms = 2;
  auto* net = app.add_subcommand("gen-network", "write a built-in network as JSON");
  net->add_option("name", which, "rts24 or feeder15")->required();
  net->add_option("--farms", farms, "rts24 wind farm count");
  net->add_option("-o,--output", output, "output path")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(path, backend, threads, seed, output);
    if (*plot) return cmd_plot(path);
    if (*gen) return cmd_gen_data(path, seed, output);
    if (*val) return cmd_validate(path);
    if (*net) return cmd_gen_network(which, farms, output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
