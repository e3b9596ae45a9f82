#include "cdro/core_model.hpp"

#include "cdro/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cdro {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  std::string t = trim(s);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw IoError("cannot parse number '" + s + "'");
  return v;
}

std::string format_vector(const vector_t& v) {
  std::string out;
  for (index_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + format_double(v(k));
  return out;
}

vector_t parse_vector(const std::string& s) {
  auto parts = split(s, ',');
  vector_t v(static_cast<index_t>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) v(static_cast<index_t>(k)) = parse_double(parts[k]);
  return v;
}

void write_dataset(const UncertaintyDataset& ds, const std::string& csv_path) {
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot open " + csv_path + " for writing");
  for (index_t k = 0; k < ds.dim(); ++k) os << (k ? "," : "") << 'w' << (k + 1);
  os << '\n';
  for (index_t i = 0; i < ds.sample_count(); ++i) {
    for (index_t k = 0; k < ds.dim(); ++k) os << (k ? "," : "") << format_double(ds.deviations(i, k));
    os << '\n';
  }
  std::ofstream meta(csv_path + ".meta");
  if (!meta) throw IoError("cannot open " + csv_path + ".meta for writing");
  meta << "forecast=" << format_vector(ds.forecast) << '\n';
  meta << "capacities=" << format_vector(ds.capacities) << '\n';
  for (const auto& [k, v] : ds.metadata)
    if (k != "forecast" && k != "capacities") meta << k << '=' << v << '\n';
}

UncertaintyDataset read_dataset(const std::string& csv_path) {
  std::ifstream is(csv_path);
  if (!is) throw IoError("cannot open dataset " + csv_path);
  std::string line;
  if (!std::getline(is, line)) throw IoError(csv_path + ": empty file");
  auto header = split(line, ',');
  const index_t w = static_cast<index_t>(header.size());
  for (index_t k = 0; k < w; ++k)
    if (header[static_cast<std::size_t>(k)] != "w" + std::to_string(k + 1))
      throw IoError(csv_path + ": header column " + std::to_string(k + 1) + " should be w" + std::to_string(k + 1));
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto parts = split(line, ',');
    if (static_cast<index_t>(parts.size()) != w)
      throw IoError(csv_path + ":" + std::to_string(lineno) + ": expected " + std::to_string(w) + " fields");
    std::vector<double> r;
    for (const auto& p : parts) r.push_back(parse_double(p));
    rows.push_back(std::move(r));
  }
  UncertaintyDataset ds;
  ds.deviations.resize(static_cast<index_t>(rows.size()), w);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (index_t k = 0; k < w; ++k) ds.deviations(static_cast<index_t>(i), k) = rows[i][static_cast<std::size_t>(k)];

  std::ifstream meta(csv_path + ".meta");
  if (!meta) throw IoError("missing sidecar " + csv_path + ".meta");
  while (std::getline(meta, line)) {
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(csv_path + ".meta: line without '=': " + line);
    ds.metadata[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!ds.metadata.count("forecast") || !ds.metadata.count("capacities"))
    throw IoError(csv_path + ".meta must define forecast= and capacities=");
  ds.forecast = parse_vector(ds.metadata["forecast"]);
  ds.capacities = parse_vector(ds.metadata["capacities"]);
  ds.metadata.erase("forecast");
  ds.metadata.erase("capacities");
  if (ds.forecast.size() != w || ds.capacities.size() != w)
    throw DimensionError(csv_path + ": sidecar vectors do not match " + std::to_string(w) + " columns");
  return ds;
}

}  // namespace cdro
