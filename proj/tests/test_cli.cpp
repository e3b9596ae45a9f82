#include "cdro/config.hpp"
#include "cdro/errors.hpp"
#include "cdro/experiment.hpp"
#include "cdro/opf_dc.hpp"
#include "cdro/plot_data.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cdro;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cdro_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args, const fs::path& dir) {
  const auto log = dir / "cli.log";
  const std::string cmd = std::string("\"") + CDRO_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(log)};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

/** One bus, one 100 MW farm, two units with rmax MW of reserve capability each */
fs::path toy_network(const fs::path& dir, double rmax = 60.0) {
  DcNetwork net;
  net.buses = 1;
  net.generators.push_back({"G1", 0, 10.0, 3.0, 2.0, 0.0, 200.0, rmax});
  net.generators.push_back({"G2", 0, 20.0, 5.0, 4.0, 0.0, 200.0, rmax});
  net.loads.push_back({0, 150.0});
  net.wind.push_back({0, 100.0, 0.5});
  net.compute_ptdf();
  const auto path = dir / "toy.json";
  write_dc_network(net, path.string());
  return path;
}

}  // namespace

TEST_CASE("key/value parsing") {
  auto kv = KeyValueConfig::parse(
      "# sweep\nmodel = \"dc\"\ntheta1 = [1e-4, 0.01]  # grid\nn_in = 30\n[generator]\ncorrelation = 0.7\nflag = true\n");
  CHECK(kv.get_string("model") == "dc");
  CHECK(kv.get_double_list("theta1") == std::vector<double>{1e-4, 0.01});
  CHECK(kv.get_int_list("n_in") == std::vector<long long>{30});
  CHECK(kv.get_double("generator.correlation") == 0.7);
  CHECK(kv.get_bool("generator.flag", false));
  CHECK(kv.get_double("missing", 2.5) == 2.5);
  CHECK_NOTHROW(kv.reject_unused());
}

TEST_CASE("unknown keys and malformed values name the line") {
  auto kv = KeyValueConfig::parse("model = \"dc\"\n\nthetta1 = 0.1\n", "x.toml");
  kv.get_string("model");
  try {
    kv.reject_unused();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("thetta1") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
  auto bad = KeyValueConfig::parse("n = abc\n");
  CHECK_THROWS_AS(bad.get_double("n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("just words\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("a = [1, 2\n"), ConfigError);
}

TEST_CASE("experiment config validation") {
  auto ok = parse_experiment_config(KeyValueConfig::parse("theta1 = [0.1]\ntheta2 = [0.01, 0.1]\n"));
  CHECK(ok.ambiguity == AmbiguityKind::m2);
  CHECK(expand_grid(ok).size() == 2);
  CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("ambiguity = \"m1\"\ntheta1 = [0.1]\ntheta2 = [0.1]\n")),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("theta1 = [-1]\ntheta2 = [0.1]\n")), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("model = \"ac\"\ntheta1 = [0.1]\n")), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(KeyValueConfig::parse("theta1 = [0.1]\ntheta2 = [0.1]\nbogus = 1\n")),
                  ConfigError);
}

TEST_CASE("metadata hash is stable and sensitive") {
  auto a = parse_experiment_config(KeyValueConfig::parse("theta1 = [0.1]\ntheta2 = [0.1]\n"));
  auto b = a;
  CHECK(metadata_hash(run_metadata(a)) == metadata_hash(run_metadata(b)));
  CHECK(metadata_hash(run_metadata(a)).size() == 16);
  b.ground_norm = GroundNorm::inf_norm;
  CHECK(metadata_hash(run_metadata(a)) != metadata_hash(run_metadata(b)));
}

TEST_CASE("cli: usage errors") {
  auto dir = scratch("usage");
  CHECK(cli("", dir).code != 0);
  CHECK(cli("run", dir).code != 0);
  write(dir / "bad.toml", "theta1 = [0.1]\nunknown_key = 3\n");
  auto r = cli("run " + (dir / "bad.toml").string(), dir);
  CHECK(r.code == 2);
  CHECK(r.out.find("unknown_key") != std::string::npos);
  write(dir / "bk.toml", "theta1 = [0.1]\ntheta2 = [0.1]\nbackend = \"nope\"\n");
  CHECK(cli("run " + (dir / "bk.toml").string(), dir).code == 2);
}

TEST_CASE("cli: one grid point on the toy network") {
  auto dir = scratch("single");
  const auto net = toy_network(dir);
  write(dir / "one.toml", "theta1 = [0.01]\ntheta2 = [0.1]\nn_in = [10]\nnetwork = \"" + net.string() +
                              "\"\nbackend = \"simplex\"\n[generator]\ncount = 60\n");
  auto r = cli("run " + (dir / "one.toml").string() + " --output " + (dir / "out").string(), dir);
  REQUIRE(r.code == 0);
  auto rows = lines(slurp(dir / "out" / "results.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == kResultsHeader);
  CHECK(rows[1].find(",OPTIMAL,") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "run.json"));

  // same config, same rows
  auto again = cli("run " + (dir / "one.toml").string() + " --output " + (dir / "out2").string(), dir);
  REQUIRE(again.code == 0);
  auto rows2 = lines(slurp(dir / "out2" / "results.csv"));
  auto strip_times = [](std::string row) {
    // solve and build times differ run to run
    std::vector<std::string> cells;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    cells[18] = cells[19] = "";
    std::string out;
    for (const auto& c : cells) out += c + ",";
    return out;
  };
  CHECK(strip_times(rows2[1]) == strip_times(rows[1]));

  auto p = cli("plot-data " + (dir / "out").string(), dir);
  REQUIRE(p.code == 0);
  auto t1 = lines(slurp(dir / "out" / "cost_vs_theta1.csv"));
  CHECK(t1.size() == 2);
}

TEST_CASE("cli: an infeasible grid point is a row, not a failure") {
  auto dir = scratch("infeasible");
  const auto net = toy_network(dir, 10.0);
  // 20 MW of reserve cannot hedge a 100 MW farm against a wide ball
  write(dir / "g.toml", "ambiguity = \"m1\"\ntheta1 = [0.0, 0.5]\nn_in = [10]\nnetwork = \"" + net.string() +
                            "\"\nbackend = \"simplex\"\nevaluate_oos = false\n[generator]\ncount = 40\n");
  auto r = cli("run " + (dir / "g.toml").string() + " --output " + (dir / "out").string(), dir);
  REQUIRE(r.code == 0);
  auto rows = lines(slurp(dir / "out" / "results.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].find(",INFEASIBLE,") != std::string::npos);
}

TEST_CASE("cli: two runs differing in theta2 give two sorted rows") {
  auto dir = scratch("theta2");
  const auto net = toy_network(dir);
  for (const auto& [name, t2] : std::vector<std::pair<std::string, std::string>>{{"b", "0.2"}, {"a", "0.05"}}) {
    write(dir / (name + ".toml"), "theta1 = [0.01]\ntheta2 = [" + t2 + "]\nn_in = [10]\nnetwork = \"" + net.string() +
                                      "\"\nbackend = \"simplex\"\nevaluate_oos = false\n[generator]\ncount = 40\n");
    REQUIRE(cli("run " + (dir / (name + ".toml")).string() + " --output " + (dir / "res" / name).string(), dir).code ==
            0);
  }
  auto paths = emit_plot_data((dir / "res").string());
  CHECK(paths.size() == 5);
  auto rows = lines(slurp(dir / "res" / "cost_vs_theta2.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].find("0.05") != std::string::npos);
  CHECK(rows[2].find("0.2") != std::string::npos);
  CHECK_THROWS_AS(emit_plot_data(scratch("empty").string()), IoError);
}

TEST_CASE("cli: data and network tools") {
  auto dir = scratch("tools");
  write(dir / "gen.toml", "farms = 3\ncorrelation = 0.4\ncount = 50\nseed = 9\n");
  auto g = cli("gen-data " + (dir / "gen.toml").string() + " -o " + (dir / "d.csv").string(), dir);
  REQUIRE(g.code == 0);
  auto ds = read_dataset((dir / "d.csv").string());
  CHECK(ds.sample_count() == 50);
  CHECK(ds.dim() == 3);

  REQUIRE(cli("gen-network rts24 --farms 4 -o " + (dir / "rts.json").string(), dir).code == 0);
  auto v = cli("validate " + (dir / "rts.json").string(), dir);
  CHECK(v.code == 0);
  CHECK(v.out.find("24 buses") != std::string::npos);
  REQUIRE(cli("gen-network feeder15 -o " + (dir / "f.json").string(), dir).code == 0);
  CHECK(cli("validate " + (dir / "f.json").string(), dir).out.find("15 nodes") != std::string::npos);
  write(dir / "broken.json", "{ not json");
  CHECK(cli("validate " + (dir / "broken.json").string(), dir).code != 0);
}

TEST_CASE("shipped configs parse and validate") {
  const std::filesystem::path root(CDRO_SOURCE_DIR);
  int experiments = 0;
  for (const auto& e : std::filesystem::directory_iterator(root / "configs")) {
    if (e.path().extension() != ".toml" || e.path().filename() == "generator.toml") continue;
    INFO(e.path().string());
    const auto cfg = load_experiment_config(e.path().string());
    CHECK_FALSE(expand_grid(cfg).empty());
    ++experiments;
  }
  CHECK(experiments >= 7);
  CHECK(read_dc_network((root / "data" / "rts24.json").string()).buses == 24);
}
