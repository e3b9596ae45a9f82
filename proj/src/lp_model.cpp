#include "cdro/lp/model.hpp"

#include "cdro/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

namespace cdro::lp {

LinExpr& LinExpr::add(const LinExpr& e, double scale) {
  constant_ += scale * e.constant_;
  if (scale == 0.0) return *this;
  terms_.reserve(terms_.size() + e.terms_.size());
  for (const auto& [id, c] : e.terms_) terms_.emplace_back(id, scale * c);
  return *this;
}

LinExpr& LinExpr::compress() {
  std::sort(terms_.begin(), terms_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t k = 0; k < terms_.size();) {
    index_t id = terms_[k].first;
    double sum = 0.0;
    for (; k < terms_.size() && terms_[k].first == id; ++k) sum += terms_[k].second;
    if (sum != 0.0) terms_[out++] = {id, sum};
  }
  terms_.resize(out);
  return *this;
}

double LinExpr::evaluate(const vector_t& x) const {
  double v = constant_;
  for (const auto& [id, c] : terms_) v += c * x(id);
  return v;
}

LinExpr& LinExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& t : terms_) t.second *= s;
  return *this;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

void ModelBuilder::check(index_t id) const {
  if (id < 0 || id >= num_vars())
    throw InvalidArgument("variable handle " + std::to_string(id) + " does not belong to this model");
}

Var ModelBuilder::add_var(double lo, double hi, std::string name) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi)
    throw InvalidArgument("variable bounds violate lo <= hi: [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  lo_.push_back(lo);
  hi_.push_back(hi);
  var_names_.push_back(std::move(name));
  return Var{num_vars() - 1};
}

std::vector<Var> ModelBuilder::add_vars(index_t count, double lo, double hi, const std::string& prefix) {
  std::vector<Var> out;
  out.reserve(static_cast<std::size_t>(count));
  for (index_t k = 0; k < count; ++k)
    out.push_back(add_var(lo, hi, prefix.empty() ? std::string{} : prefix + std::to_string(k)));
  return out;
}

void ModelBuilder::set_bounds(Var v, double lo, double hi) {
  check(v.id);
  if (lo > hi) throw InvalidArgument("variable bounds violate lo <= hi");
  lo_[static_cast<std::size_t>(v.id)] = lo;
  hi_[static_cast<std::size_t>(v.id)] = hi;
}

Row ModelBuilder::add_row(const LinExpr& lhs, Sense sense, double rhs, std::string name) {
  LinExpr e = lhs;
  e.compress();
  for (const auto& [id, c] : e.terms()) {
    check(id);
    if (!std::isfinite(c)) throw InvalidArgument("non-finite row coefficient");
  }
  double b = rhs - e.constant();
  if (!std::isfinite(b)) throw InvalidArgument("non-finite row right-hand side");
  for (const auto& [id, c] : e.terms()) {
    col_.push_back(id);
    val_.push_back(c);
  }
  start_.push_back(static_cast<index_t>(col_.size()));
  sense_.push_back(sense);
  rhs_.push_back(b);
  row_names_.push_back(std::move(name));
  return Row{num_rows() - 1};
}

Row ModelBuilder::add_row(const LinExpr& lhs, Sense sense, const LinExpr& rhs, std::string name) {
  return add_row(lhs - rhs, sense, 0.0, std::move(name));
}

void ModelBuilder::add_cone(std::vector<Var> vars) {
  if (vars.size() < 2) throw InvalidArgument("cone needs at least two members");
  for (Var v : vars) check(v.id);
  cones_.push_back(std::move(vars));
}

void ModelBuilder::set_objective(const LinExpr& objective, ObjSense sense) {
  LinExpr e = objective;
  e.compress();
  for (const auto& [id, c] : e.terms()) check(id);
  objective_ = std::move(e);
  obj_sense_ = sense;
}

matrix_t ModelBuilder::dense_matrix() const {
  matrix_t a = matrix_t::Zero(num_rows(), num_vars());
  for (index_t r = 0; r < num_rows(); ++r)
    for (index_t k = row_begin(r); k < row_end(r); ++k) a(r, entry_col(k)) += entry_val(k);
  return a;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "OPTIMAL";
    case SolveStatus::infeasible: return "INFEASIBLE";
    case SolveStatus::unbounded: return "UNBOUNDED";
    case SolveStatus::numeric_failure: return "NUMERIC_FAILURE";
    case SolveStatus::time_limit: return "TIME_LIMIT";
  }
  return "UNKNOWN";
}

SolveResult solve(ModelBuilder& model, const LpBackend& backend, const SolveOptions& options) {
  if (model.has_cones() && !backend.supports_cones())
    throw ConfigError("backend '" + backend.name() + "' cannot handle second-order cone rows");
  auto dump = [&] {
    if (options.dump_path.empty()) return;
    std::ofstream os(options.dump_path);
    if (!os) throw IoError("cannot write LP dump " + options.dump_path);
    model.write_lp(os);
  };
  auto session = backend.open(model, options);
  double total = 0.0;
  for (int round = 1;; ++round) {
    SolveResult res = session->solve();
    total += res.wall_time;
    res.wall_time = total;
    res.rounds = round;
    if (!res.optimal() || model.lazy().empty()) {
      dump();
      return res;
    }
    std::size_t added = 0;
    for (const auto& gen : model.lazy()) added += gen->separate(res.primal, model);
    if (added == 0) {
      dump();
      return res;
    }
    if (round >= options.max_rounds) {
      res.status = SolveStatus::numeric_failure;
      res.message = "lazy separation did not converge within " + std::to_string(options.max_rounds) + " rounds";
      return res;
    }
    if (total > options.time_limit) {
      res.status = SolveStatus::time_limit;
      return res;
    }
    session->sync_rows();
  }
}

}  // namespace cdro::lp
