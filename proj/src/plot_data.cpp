#include "cdro/plot_data.hpp"

#include "cdro/core_model.hpp"
#include "cdro/errors.hpp"
#include "cdro/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace cdro {
namespace {

using Record = std::map<std::string, std::string>;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<Record> read_results(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_csv(line);
  std::vector<Record> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw IoError(file.string() + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
    Record r;
    for (std::size_t k = 0; k < header.size(); ++k) r[header[k]] = cells[k];
    rows.push_back(std::move(r));
  }
  return rows;
}

// numeric-aware ordering; empty cells sort last
bool cell_less(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return !a.empty() && b.empty();
  try {
    const double x = parse_double(a), y = parse_double(b);
    if (x != y) return x < y;
    return false;
  } catch (const Error&) {
    return a < b;
  }
}

std::string write_figure(const std::filesystem::path& dir, const std::string& name, std::vector<Record> rows,
                         const std::vector<std::string>& key, const std::vector<std::string>& values) {
  std::stable_sort(rows.begin(), rows.end(), [&](const Record& a, const Record& b) {
    for (const auto& k : key) {
      const auto& x = a.at(k);
      const auto& y = b.at(k);
      if (cell_less(x, y)) return true;
      if (cell_less(y, x)) return false;
    }
    return false;
  });
  const auto path = dir / name;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::string header;
  for (const auto& c : key) header += (header.empty() ? "" : ",") + c;
  for (const auto& c : values) header += "," + c;
  out << header << '\n';
  for (const auto& r : rows) {
    std::string line;
    for (const auto& c : key) line += (line.empty() ? "" : ",") + r.at(c);
    for (const auto& c : values) line += "," + r.at(c);
    out << line << '\n';
  }
  return path.string();
}

}  // namespace

std::vector<std::string> emit_plot_data(const std::string& results_dir) {
  const std::filesystem::path dir(results_dir);
  if (!std::filesystem::is_directory(dir)) throw IoError("results directory " + results_dir + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "results.csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Record> rows;
  for (const auto& f : files) {
    auto r = read_results(f);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (rows.empty()) throw IoError("no results.csv rows under " + results_dir);
  for (const auto& r : rows)
    for (const char* col : {"model", "ambiguity", "theta1", "theta2", "epsilon", "n_in", "farms", "status",
                            "expected_cost", "std_dev", "eens_mwh", "solve_time_s", "build_time_s", "reserve_up_mw",
                            "reserve_down_mw"})
      if (!r.count(col)) throw IoError(std::string("results file lacks column '") + col + "'");

  const std::vector<std::string> cost{"expected_cost", "std_dev", "eens_mwh", "status"};
  const std::vector<std::string> timing{"solve_time_s", "build_time_s", "status"};
  return {
      write_figure(dir, "cost_vs_theta1.csv", rows, {"model", "ambiguity", "theta2", "epsilon", "n_in", "farms", "theta1"},
                   cost),
      write_figure(dir, "cost_vs_theta2.csv", rows, {"model", "ambiguity", "theta1", "epsilon", "n_in", "farms", "theta2"},
                   cost),
      write_figure(dir, "time_vs_n.csv", rows, {"model", "ambiguity", "farms", "theta1", "theta2", "epsilon", "n_in"},
                   timing),
      write_figure(dir, "time_vs_farms.csv", rows, {"model", "ambiguity", "n_in", "theta1", "theta2", "epsilon", "farms"},
                   timing),
      write_figure(dir, "reserve_bars.csv", rows, {"model", "ambiguity", "epsilon", "n_in", "farms", "theta1", "theta2"},
                   {"reserve_up_mw", "reserve_down_mw", "status"}),
  };
}

}  // namespace cdro
