#include "cdro/errors.hpp"
#include "cdro/opf_radial.hpp"

#include <json.hpp>

#include <fstream>

namespace cdro {

using json = nlohmann::json;

RadialNetwork read_radial_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feeder file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("feeder file " + path + ": " + e.what());
  }
  RadialNetwork net;
  try {
    net.base_mva = j.value("base_mva", 1.0);
    for (const auto& n : j.at("nodes")) {
      RadialNode nd;
      nd.dP = n.value("dP", 0.0);
      nd.dQ = n.value("dQ", 0.0);
      nd.controllable = n.value("controllable", false);
      nd.gPmin = n.value("gPmin", 0.0);
      nd.gPmax = n.value("gPmax", 0.0);
      nd.gQmin = n.value("gQmin", 0.0);
      nd.gQmax = n.value("gQmax", 0.0);
      nd.vmin = n.value("vmin", 0.95);
      nd.vmax = n.value("vmax", 1.05);
      nd.cost = n.value("cost", 0.0);
      net.nodes.push_back(nd);
    }
    for (const auto& l : j.at("lines"))
      net.lines.push_back({l.at("from").get<index_t>(), l.at("to").get<index_t>(), l.at("R").get<double>(),
                           l.at("X").get<double>(), l.at("fbar").get<double>()});
    for (const auto& w : j.at("wind"))
      net.wind.push_back({w.at("node").get<index_t>(), w.at("capacity").get<double>(), w.value("forecast", 0.5),
                          w.value("q_ratio", 0.0)});
  } catch (const json::exception& e) {
    throw IoError("feeder file " + path + ": " + e.what());
  }
  if (!net.nodes.empty()) net.nodes[0].controllable = true;
  net.build_topology();
  validate(net);
  return net;
}

void write_radial_network(const RadialNetwork& net, const std::string& path) {
  json j;
  j["units"] = "p.u. on base_mva; nodes 0-based, node 0 is the substation; costs in $/MWh";
  j["base_mva"] = net.base_mva;
  for (const char* key : {"nodes", "lines", "wind"}) j[key] = json::array();
  for (const auto& n : net.nodes)
    j["nodes"].push_back({{"dP", n.dP}, {"dQ", n.dQ}, {"controllable", n.controllable}, {"gPmin", n.gPmin},
                          {"gPmax", n.gPmax}, {"gQmin", n.gQmin}, {"gQmax", n.gQmax}, {"vmin", n.vmin},
                          {"vmax", n.vmax}, {"cost", n.cost}});
  for (const auto& l : net.lines)
    j["lines"].push_back({{"from", l.from}, {"to", l.to}, {"R", l.R}, {"X", l.X}, {"fbar", l.fbar}});
  for (const auto& w : net.wind)
    j["wind"].push_back({{"node", w.node}, {"capacity", w.capacity}, {"forecast", w.forecast}, {"q_ratio", w.q_ratio}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write feeder file " + path);
  out << j.dump(2) << '\n';
}

RadialNetwork make_feeder15() {
  RadialNetwork net;
  net.base_mva = 1.0;
  net.nodes.resize(15);
  const double load[15] = {0.0, 0.07, 0.11, 0.09, 0.11, 0.13, 0.15, 0.16, 0.07, 0.09, 0.13, 0.11, 0.11, 0.07, 0.09};
  for (int i = 0; i < 15; ++i) {
    net.nodes[static_cast<std::size_t>(i)].dP = load[i];
    net.nodes[static_cast<std::size_t>(i)].dQ = 0.4 * load[i];
  }
  auto& root = net.nodes[0];
  root.controllable = true;
  root.gPmin = 0.0;  // no export, so the local units must hold headroom for wind deviations
  root.gPmax = 3.0;
  root.gQmin = -3.0;
  root.gQmax = 3.0;
  root.cost = 50.0;
  for (auto [node, cost] : {std::pair{7, 20.0}, std::pair{10, 25.0}}) {
    auto& g = net.nodes[static_cast<std::size_t>(node)];
    g.controllable = true;
    g.gPmin = 0.0;
    g.gPmax = 1.0;
    g.gQmin = -0.5;
    g.gQmax = 0.5;
    g.cost = cost;
  }
  // trunk 0..7, laterals 3-8-9-10, 5-11-12 and 1-13-14
  const int parent[15] = {-1, 0, 1, 2, 3, 4, 5, 6, 3, 8, 9, 5, 11, 1, 13};
  for (int i = 1; i < 15; ++i) {
    const bool trunk = i <= 7;
    net.lines.push_back({parent[i], i, trunk ? 0.004 : 0.006, trunk ? 0.008 : 0.010, trunk ? 2.5 : 1.5});
  }
  net.wind.push_back({6, 0.5, 0.5, 0.0});
  net.wind.push_back({12, 0.5, 0.5, 0.0});
  net.build_topology();
  return net;
}

}  // namespace cdro
