#include "cdro/errors.hpp"
#include "cdro/opf_dc.hpp"

#include <json.hpp>

#include <Eigen/LU>

#include <cmath>
#include <fstream>

namespace cdro {

vector_t DcNetwork::demand() const {
  vector_t d(static_cast<index_t>(loads.size()));
  for (std::size_t i = 0; i < loads.size(); ++i) d(static_cast<index_t>(i)) = loads[i].demand;
  return d;
}

vector_t DcNetwork::wind_capacity() const {
  vector_t w(static_cast<index_t>(wind.size()));
  for (std::size_t i = 0; i < wind.size(); ++i) w(static_cast<index_t>(i)) = wind[i].capacity;
  return w;
}

matrix_t bus_ptdf(index_t buses, const std::vector<DcLine>& lines, index_t slack) {
  if (slack < 0 || slack >= buses) throw InvalidArgument("slack bus out of range");
  const index_t f = static_cast<index_t>(lines.size());
  matrix_t a = matrix_t::Zero(f, buses);
  vector_t b(f);
  for (index_t l = 0; l < f; ++l) {
    const auto& ln = lines[static_cast<std::size_t>(l)];
    if (!(ln.reactance > 0.0)) throw InvalidArgument("line " + std::to_string(l) + " needs a positive reactance");
    a(l, ln.from) += 1.0;
    a(l, ln.to) -= 1.0;
    b(l) = 1.0 / ln.reactance;
  }
  if (buses == 1) return matrix_t::Zero(f, 1);
  // drop the slack column
  matrix_t ar(f, buses - 1);
  for (index_t n = 0, c = 0; n < buses; ++n)
    if (n != slack) ar.col(c++) = a.col(n);
  const matrix_t bred = ar.transpose() * b.asDiagonal() * ar;
  Eigen::FullPivLU<matrix_t> lu(bred);
  if (lu.rank() < buses - 1) throw InvalidArgument("network is not connected");
  const matrix_t hr = b.asDiagonal() * ar * lu.inverse();
  matrix_t h = matrix_t::Zero(f, buses);
  for (index_t n = 0, c = 0; n < buses; ++n)
    if (n != slack) h.col(n) = hr.col(c++);
  return h;
}

void DcNetwork::compute_ptdf() {
  const matrix_t h = bus_ptdf(buses, lines, slack);
  const index_t f = static_cast<index_t>(lines.size());
  ptdf_gen.resize(f, static_cast<index_t>(generators.size()));
  ptdf_wind.resize(f, static_cast<index_t>(wind.size()));
  ptdf_load.resize(f, static_cast<index_t>(loads.size()));
  for (std::size_t p = 0; p < generators.size(); ++p) ptdf_gen.col(static_cast<index_t>(p)) = h.col(generators[p].node);
  for (std::size_t w = 0; w < wind.size(); ++w) ptdf_wind.col(static_cast<index_t>(w)) = h.col(wind[w].node);
  for (std::size_t d = 0; d < loads.size(); ++d) ptdf_load.col(static_cast<index_t>(d)) = h.col(loads[d].node);
}

void validate(const DcNetwork& net) {
  auto in_range = [&](index_t n) { return n >= 0 && n < net.buses; };
  if (net.buses < 1 || !in_range(net.slack)) throw InvalidArgument("network needs at least one bus and a valid slack");
  for (const auto& g : net.generators) {
    if (!in_range(g.node)) throw InvalidArgument("generator " + g.name + " sits on an unknown bus");
    if (g.gmin > g.gmax) throw InvalidArgument("generator " + g.name + " has gmin > gmax");
    if (g.rmax < 0.0) throw InvalidArgument("generator " + g.name + " has negative reserve capability");
  }
  for (const auto& l : net.loads)
    if (!in_range(l.node) || l.demand < 0.0) throw InvalidArgument("load on an unknown bus or with negative demand");
  for (const auto& l : net.lines)
    if (!in_range(l.from) || !in_range(l.to) || l.from == l.to || !(l.fmax > 0.0))
      throw InvalidArgument("line with bad endpoints or non-positive capacity");
  for (const auto& w : net.wind)
    if (!in_range(w.node) || !(w.capacity > 0.0) || w.forecast < 0.0 || w.forecast > 1.0)
      throw InvalidArgument("wind farm on an unknown bus or with bad capacity/forecast");
  const auto f = static_cast<index_t>(net.lines.size());
  auto check = [&](const matrix_t& m, std::size_t cols, const char* what) {
    if (m.rows() != f || m.cols() != static_cast<index_t>(cols))
      throw DimensionError(std::string(what) + " PTDF is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                           ", expected " + std::to_string(f) + "x" + std::to_string(cols));
  };
  check(net.ptdf_gen, net.generators.size(), "generator");
  check(net.ptdf_wind, net.wind.size(), "wind");
  check(net.ptdf_load, net.loads.size(), "load");
}

namespace {

using nlohmann::json;

json matrix_json(const matrix_t& m) {
  json rows = json::array();
  for (index_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (index_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

matrix_t json_matrix(const json& j, index_t rows, index_t cols) {
  if (!j.is_array() || static_cast<index_t>(j.size()) != rows) throw IoError("PTDF block has the wrong row count");
  matrix_t m(rows, cols);
  for (index_t r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<index_t>(row.size()) != cols) throw IoError("PTDF block has the wrong column count");
    for (index_t c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

DcNetwork read_dc_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("network file " + path + ": " + e.what());
  }
  DcNetwork net;
  try {
    // bus numbers are 1-based in the file
    net.buses = j.at("buses").get<index_t>();
    net.slack = j.value("slack", index_t{1}) - 1;
    for (const auto& g : j.at("generators"))
      net.generators.push_back({g.value("name", std::string{}), g.at("node").get<index_t>() - 1, g.at("cost").get<double>(),
                                g.value("cost_up", 0.0), g.value("cost_down", 0.0), g.value("gmin", 0.0),
                                g.at("gmax").get<double>(), g.value("rmax", 0.0)});
    for (const auto& l : j.at("loads")) net.loads.push_back({l.at("node").get<index_t>() - 1, l.at("demand").get<double>()});
    for (const auto& l : j.at("lines"))
      net.lines.push_back({l.at("from").get<index_t>() - 1, l.at("to").get<index_t>() - 1, l.at("reactance").get<double>(),
                           l.at("fmax").get<double>()});
    for (const auto& w : j.at("wind"))
      net.wind.push_back({w.at("node").get<index_t>() - 1, w.at("capacity").get<double>(), w.value("forecast", 0.5)});
    if (j.contains("ptdf")) {
      const auto& p = j.at("ptdf");
      const auto f = static_cast<index_t>(net.lines.size());
      net.ptdf_gen = json_matrix(p.at("generators"), f, static_cast<index_t>(net.generators.size()));
      net.ptdf_wind = json_matrix(p.at("wind"), f, static_cast<index_t>(net.wind.size()));
      net.ptdf_load = json_matrix(p.at("loads"), f, static_cast<index_t>(net.loads.size()));
    } else {
      net.compute_ptdf();
    }
  } catch (const json::exception& e) {
    throw IoError("network file " + path + ": " + e.what());
  }
  validate(net);
  return net;
}

void write_dc_network(const DcNetwork& net, const std::string& path) {
  json j;
  j["units"] = "MW, $/MWh, $/MW reserve, reactance p.u.; buses 1-based";
  j["buses"] = net.buses;
  j["slack"] = net.slack + 1;
  for (const char* key : {"generators", "loads", "lines", "wind"}) j[key] = json::array();
  for (const auto& g : net.generators)
    j["generators"].push_back({{"name", g.name}, {"node", g.node + 1}, {"cost", g.cost}, {"cost_up", g.cost_up},
                               {"cost_down", g.cost_dn}, {"gmin", g.gmin}, {"gmax", g.gmax}, {"rmax", g.rmax}});
  for (const auto& l : net.loads) j["loads"].push_back({{"node", l.node + 1}, {"demand", l.demand}});
  for (const auto& l : net.lines)
    j["lines"].push_back({{"from", l.from + 1}, {"to", l.to + 1}, {"reactance", l.reactance}, {"fmax", l.fmax}});
  for (const auto& w : net.wind)
    j["wind"].push_back({{"node", w.node + 1}, {"capacity", w.capacity}, {"forecast", w.forecast}});
  j["ptdf"] = {{"generators", matrix_json(net.ptdf_gen)}, {"wind", matrix_json(net.ptdf_wind)},
               {"loads", matrix_json(net.ptdf_load)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write network file " + path);
  out << j.dump(2) << '\n';
}

}  // namespace cdro
