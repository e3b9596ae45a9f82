#include "cdro/lp/model.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace cdro::lp {
namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string var_label(const ModelBuilder& m, index_t j) {
  const std::string& n = m.var_name(j);
  return n.empty() ? "x" + std::to_string(j) : n + "#" + std::to_string(j);
}

void write_terms(std::ostream& os, const ModelBuilder& m,
                 const std::vector<std::pair<index_t, double>>& terms) {
  if (terms.empty()) {
    os << " 0 " << var_label(m, 0);
    return;
  }
  for (const auto& [id, c] : terms) os << (c < 0 ? " - " : " + ") << num(std::fabs(c)) << ' ' << var_label(m, id);
}

}  // namespace

void ModelBuilder::write_lp(std::ostream& os) const {
  os << (obj_sense_ == ObjSense::minimize ? "Minimize\n" : "Maximize\n") << " obj:";
  write_terms(os, *this, objective_.terms());
  if (objective_.constant() != 0.0) os << " + " << num(objective_.constant()) << " constant";
  os << "\nSubject To\n";
  for (index_t r = 0; r < num_rows(); ++r) {
    os << ' ' << (row_names_[static_cast<std::size_t>(r)].empty() ? "r" : row_names_[static_cast<std::size_t>(r)] + "#")
       << r << ':';
    std::vector<std::pair<index_t, double>> terms;
    for (index_t k = row_begin(r); k < row_end(r); ++k) terms.emplace_back(entry_col(k), entry_val(k));
    write_terms(os, *this, terms);
    const char* op = row_sense(r) == Sense::le ? " <= " : row_sense(r) == Sense::ge ? " >= " : " = ";
    os << op << num(row_rhs(r)) << '\n';
  }
  os << "Bounds\n";
  for (index_t j = 0; j < num_vars(); ++j) {
    if (lower(j) == 0.0 && std::isinf(upper(j))) continue;
    if (std::isinf(lower(j)) && std::isinf(upper(j))) {
      os << ' ' << var_label(*this, j) << " free\n";
      continue;
    }
    os << ' ' << num(lower(j)) << " <= " << var_label(*this, j) << " <= " << num(upper(j)) << '\n';
  }
  os << "End\n";
}

}  // namespace cdro::lp
