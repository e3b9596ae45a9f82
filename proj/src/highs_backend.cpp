#include "cdro/lp/backends.hpp"

#include "cdro/errors.hpp"

#include "Highs.h"

#include <chrono>
#include <cmath>

namespace cdro::lp {
namespace {

double lo_of(Sense s, double rhs) { return s == Sense::le ? -kHighsInf : rhs; }
double hi_of(Sense s, double rhs) { return s == Sense::ge ? kHighsInf : rhs; }
double bound(double v) { return std::isinf(v) ? (v > 0 ? kHighsInf : -kHighsInf) : v; }

class HighsSession final : public LpSession {
 public:
  HighsSession(const ModelBuilder& model, const SolveOptions& options) : model_(model), options_(options) {
    highs_.setOptionValue("output_flag", false);
    highs_.setOptionValue("threads", 1);
    highs_.setOptionValue("random_seed", 0);
    highs_.setOptionValue("primal_feasibility_tolerance", options.tolerance);
    highs_.setOptionValue("dual_feasibility_tolerance", options.tolerance);
    highs_.setOptionValue("solver", options.algorithm);
    if (std::isfinite(options.time_limit)) highs_.setOptionValue("time_limit", options.time_limit);

    HighsLp lp;
    lp.num_col_ = static_cast<HighsInt>(model.num_vars());
    lp.num_row_ = 0;
    lp.col_cost_.assign(static_cast<std::size_t>(lp.num_col_), 0.0);
    for (const auto& [id, c] : model.objective().terms()) lp.col_cost_[static_cast<std::size_t>(id)] = c;
    lp.offset_ = model.objective().constant();
    lp.sense_ = model.objective_sense() == ObjSense::minimize ? ::ObjSense::kMinimize : ::ObjSense::kMaximize;
    lp.col_lower_.resize(static_cast<std::size_t>(lp.num_col_));
    lp.col_upper_.resize(static_cast<std::size_t>(lp.num_col_));
    for (index_t j = 0; j < model.num_vars(); ++j) {
      lp.col_lower_[static_cast<std::size_t>(j)] = bound(model.lower(j));
      lp.col_upper_[static_cast<std::size_t>(j)] = bound(model.upper(j));
    }
    lp.a_matrix_.format_ = MatrixFormat::kColwise;
    lp.a_matrix_.num_col_ = lp.num_col_;
    lp.a_matrix_.num_row_ = 0;
    lp.a_matrix_.start_.assign(static_cast<std::size_t>(lp.num_col_) + 1, 0);
    if (highs_.passModel(lp) == HighsStatus::kError) throw SolverError("HiGHS rejected the model");
    synced_ = 0;
    sync_rows();
  }

  void sync_rows() override {
    const index_t first = synced_, last = model_.num_rows();
    if (last == first) return;
    std::vector<double> lower, upper, values;
    std::vector<HighsInt> starts, indices;
    for (index_t r = first; r < last; ++r) {
      lower.push_back(lo_of(model_.row_sense(r), model_.row_rhs(r)));
      upper.push_back(hi_of(model_.row_sense(r), model_.row_rhs(r)));
      starts.push_back(static_cast<HighsInt>(values.size()));
      for (index_t k = model_.row_begin(r); k < model_.row_end(r); ++k) {
        indices.push_back(static_cast<HighsInt>(model_.entry_col(k)));
        values.push_back(model_.entry_val(k));
      }
    }
    auto st = highs_.addRows(static_cast<HighsInt>(last - first), lower.data(), upper.data(),
                             static_cast<HighsInt>(values.size()), starts.data(), indices.data(), values.data());
    if (st == HighsStatus::kError) throw SolverError("HiGHS rejected appended rows");
    synced_ = last;
  }

  SolveResult solve() override {
    SolveResult res;
    auto t0 = std::chrono::steady_clock::now();
    highs_.run();
    auto ms = highs_.getModelStatus();
    if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
      // presolve could not tell which; ask again without it
      highs_.setOptionValue("presolve", "off");
      highs_.run();
      highs_.setOptionValue("presolve", "choose");
      ms = highs_.getModelStatus();
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    switch (ms) {
      case HighsModelStatus::kOptimal: res.status = SolveStatus::optimal; break;
      case HighsModelStatus::kInfeasible: res.status = SolveStatus::infeasible; break;
      case HighsModelStatus::kUnbounded: res.status = SolveStatus::unbounded; break;
      case HighsModelStatus::kUnboundedOrInfeasible: res.status = SolveStatus::infeasible; break;
      case HighsModelStatus::kTimeLimit: res.status = SolveStatus::time_limit; break;
      default: res.status = SolveStatus::numeric_failure; break;
    }
    res.message = highs_.modelStatusToString(ms);
    if (res.status != SolveStatus::optimal) return res;
    const auto& sol = highs_.getSolution();
    res.primal = Eigen::Map<const vector_t>(sol.col_value.data(), static_cast<index_t>(sol.col_value.size()));
    res.row_dual = Eigen::Map<const vector_t>(sol.row_dual.data(), static_cast<index_t>(sol.row_dual.size()));
    res.objective_value = model_.objective().evaluate(res.primal);
    return res;
  }

 private:
  const ModelBuilder& model_;
  SolveOptions options_;
  Highs highs_;
  index_t synced_ = 0;
};

}  // namespace

std::unique_ptr<LpSession> HighsBackend::open(const ModelBuilder& model, const SolveOptions& options) const {
  return std::make_unique<HighsSession>(model, options);
}

}  // namespace cdro::lp
