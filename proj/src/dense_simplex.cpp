#include "cdro/lp/backends.hpp"

#include "cdro/errors.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>

namespace cdro::lp {
namespace {

using tableau_t = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-9;
constexpr int kReinvertEvery = 400;
constexpr int kDegenerateStreak = 50;

// x_j = offset + y[pos] - y[neg]; pos/neg are -1 when absent
struct ColumnMap {
  index_t pos = -1;
  index_t neg = -1;
  double offset = 0.0;
};

class DenseSimplex {
 public:
  DenseSimplex(const ModelBuilder& model, const SolveOptions& options) : model_(model), options_(options) {}

  SolveResult run() {
    auto t0 = std::chrono::steady_clock::now();
    SolveResult res;
    res.status = solve_internal(res);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  void standardize() {
    const index_t n = model_.num_vars();
    map_.assign(static_cast<std::size_t>(n), {});
    index_t cols = 0;
    std::vector<std::pair<index_t, double>> bound_rows;  // (column, ub)
    for (index_t j = 0; j < n; ++j) {
      auto& m = map_[static_cast<std::size_t>(j)];
      double lo = model_.lower(j), hi = model_.upper(j);
      if (std::isfinite(lo)) {
        m.pos = cols++;
        m.offset = lo;
        if (std::isfinite(hi)) bound_rows.emplace_back(m.pos, hi - lo);
      } else if (std::isfinite(hi)) {
        m.neg = cols++;
        m.offset = hi;
      } else {
        m.pos = cols++;
        m.neg = cols++;
      }
    }
    nstruct_ = cols;

    const index_t morig = model_.num_rows();
    m_ = morig + static_cast<index_t>(bound_rows.size());
    matrix_t a = matrix_t::Zero(m_, nstruct_);
    vector_t b(m_);
    std::vector<Sense> sense(static_cast<std::size_t>(m_));
    for (index_t r = 0; r < morig; ++r) {
      double rhs = model_.row_rhs(r);
      for (index_t k = model_.row_begin(r); k < model_.row_end(r); ++k) {
        const auto& cm = map_[static_cast<std::size_t>(model_.entry_col(k))];
        double v = model_.entry_val(k);
        rhs -= v * cm.offset;
        if (cm.pos >= 0) a(r, cm.pos) += v;
        if (cm.neg >= 0) a(r, cm.neg) -= v;
      }
      b(r) = rhs;
      sense[static_cast<std::size_t>(r)] = model_.row_sense(r);
    }
    for (std::size_t k = 0; k < bound_rows.size(); ++k) {
      index_t r = morig + static_cast<index_t>(k);
      a(r, bound_rows[k].first) = 1.0;
      b(r) = bound_rows[k].second;
      sense[static_cast<std::size_t>(r)] = Sense::le;
    }

    // normalize to b >= 0, then lay out [struct | slack | artificial | tracker | rhs]
    flip_.assign(static_cast<std::size_t>(m_), 1.0);
    index_t nslack = 0, nart = 0;
    for (index_t r = 0; r < m_; ++r) {
      auto& s = sense[static_cast<std::size_t>(r)];
      if (b(r) < 0) {
        flip_[static_cast<std::size_t>(r)] = -1.0;
        a.row(r) *= -1.0;
        b(r) = -b(r);
        if (s == Sense::le) s = Sense::ge;
        else if (s == Sense::ge) s = Sense::le;
      }
      if (s != Sense::eq) ++nslack;
      if (s != Sense::le) ++nart;
    }
    slack0_ = nstruct_;
    art0_ = slack0_ + nslack;
    track0_ = art0_ + nart;
    ntot_ = track0_ + m_;
    rhs_ = ntot_;
    a0_ = matrix_t::Zero(m_, ntot_);
    a0_.leftCols(nstruct_) = a;
    b0_ = b;
    basis_.assign(static_cast<std::size_t>(m_), -1);
    index_t sk = slack0_, ak = art0_;
    for (index_t r = 0; r < m_; ++r) {
      auto s = sense[static_cast<std::size_t>(r)];
      if (s == Sense::le) {
        a0_(r, sk) = 1.0;
        basis_[static_cast<std::size_t>(r)] = sk++;
      } else {
        if (s == Sense::ge) a0_(r, sk++) = -1.0;
        a0_(r, ak) = 1.0;
        basis_[static_cast<std::size_t>(r)] = ak++;
      }
      a0_(r, track0_ + r) = 1.0;
    }

    cost_ = vector_t::Zero(ntot_);
    double dir = model_.objective_sense() == ObjSense::minimize ? 1.0 : -1.0;
    for (const auto& [id, c] : model_.objective().terms()) {
      const auto& cm = map_[static_cast<std::size_t>(id)];
      if (cm.pos >= 0) cost_(cm.pos) += dir * c;
      if (cm.neg >= 0) cost_(cm.neg) -= dir * c;
    }

    t_ = tableau_t::Zero(m_ + 1, ntot_ + 1);
    t_.topLeftCorner(m_, ntot_) = a0_;
    t_.col(rhs_).head(m_) = b0_;
    dead_.assign(static_cast<std::size_t>(m_), false);
  }

  bool is_art(index_t c) const { return c >= art0_ && c < track0_; }

  void set_objective_row(const vector_t& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(ntot_) = c.transpose();
    for (index_t r = 0; r < m_; ++r) {
      double cb = c(basis_[static_cast<std::size_t>(r)]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
    }
  }

  void pivot(index_t r, index_t c) {
    double piv = t_(r, c);
    t_.row(r) /= piv;
    Eigen::VectorXd colv = t_.col(c);
    colv(r) = 0.0;
    Eigen::RowVectorXd prow = t_.row(r);
    t_.noalias() -= colv * prow;
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Rebuild the tableau from the original data and the current basis to shed drift.
  bool reinvert(const vector_t& c) {
    matrix_t bm(m_, m_);
    for (index_t r = 0; r < m_; ++r) bm.col(r) = a0_.col(basis_[static_cast<std::size_t>(r)]);
    Eigen::PartialPivLU<matrix_t> lu(bm);
    if (!std::isfinite(lu.determinant()) || std::fabs(lu.determinant()) < 1e-300) return false;
    matrix_t body = lu.solve(a0_);
    vector_t rhs = lu.solve(b0_);
    t_.topLeftCorner(m_, ntot_) = body;
    t_.col(rhs_).head(m_) = rhs;
    set_objective_row(c);
    return true;
  }

  // Returns optimal, unbounded, time_limit or numeric_failure.
  SolveStatus iterate(const vector_t& c, bool allow_art) {
    auto t0 = std::chrono::steady_clock::now();
    const long max_iter = 50L * (m_ + ntot_) + 1000;
    int streak = 0;
    double last_obj = t_(m_, rhs_);
    for (long it = 0; it < max_iter; ++it) {
      if ((it & 63) == 0 && std::isfinite(options_.time_limit) &&
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > options_.time_limit)
        return SolveStatus::time_limit;
      if (it > 0 && it % kReinvertEvery == 0 && !reinvert(c)) return SolveStatus::numeric_failure;
      const bool bland = streak > kDegenerateStreak;
      index_t enter = -1;
      double best = -options_.tolerance;
      for (index_t j = 0; j < track0_; ++j) {
        if (!allow_art && is_art(j)) continue;
        double d = t_(m_, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return SolveStatus::optimal;
      index_t leave = -1;
      double ratio = kInf, piv = 0.0;
      for (index_t r = 0; r < m_; ++r) {
        if (dead_[static_cast<std::size_t>(r)]) continue;
        double a = t_(r, enter);
        if (a <= kPivotTol) continue;
        double q = std::max(t_(r, rhs_), 0.0) / a;
        bool take = q < ratio - 1e-12;
        if (!take && q <= ratio + 1e-12 && leave >= 0) {
          take = bland ? basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)] : a > piv;
        }
        if (take) {
          leave = r;
          ratio = q;
          piv = a;
        }
      }
      if (leave < 0) return SolveStatus::unbounded;
      pivot(leave, enter);
      double obj = t_(m_, rhs_);
      if (std::fabs(obj - last_obj) <= 1e-12 * (1.0 + std::fabs(obj))) {
        ++streak;
      } else {
        streak = 0;
        last_obj = obj;
      }
    }
    return SolveStatus::numeric_failure;
  }

  SolveStatus solve_internal(SolveResult& res) {
    standardize();
    // phase 1
    vector_t c1 = vector_t::Zero(ntot_);
    for (index_t j = art0_; j < track0_; ++j) c1(j) = 1.0;
    if (track0_ > art0_) {
      set_objective_row(c1);
      auto st = iterate(c1, true);
      if (st != SolveStatus::optimal) return st == SolveStatus::unbounded ? SolveStatus::numeric_failure : st;
      if (!reinvert(c1)) return SolveStatus::numeric_failure;
      double infeas = -t_(m_, rhs_);
      if (infeas > 1e-7 * (1.0 + b0_.lpNorm<Eigen::Infinity>())) return SolveStatus::infeasible;
      for (index_t r = 0; r < m_; ++r) {
        if (!is_art(basis_[static_cast<std::size_t>(r)])) continue;
        index_t j = -1;
        double bestabs = kPivotTol;
        for (index_t k = 0; k < art0_; ++k) {
          if (std::fabs(t_(r, k)) > bestabs) {
            bestabs = std::fabs(t_(r, k));
            j = k;
          }
        }
        if (j >= 0) pivot(r, j);
        else dead_[static_cast<std::size_t>(r)] = true;
      }
    }
    // phase 2
    set_objective_row(cost_);
    auto st = iterate(cost_, false);
    if (st != SolveStatus::optimal) return st;
    if (!reinvert(cost_)) return SolveStatus::numeric_failure;
    // a reinvert may expose small negative reduced costs; finish from the clean tableau
    st = iterate(cost_, false);
    if (st != SolveStatus::optimal) return st;

    vector_t y = vector_t::Zero(ntot_);
    for (index_t r = 0; r < m_; ++r) y(basis_[static_cast<std::size_t>(r)]) = t_(r, rhs_);
    if (y.head(track0_).minCoeff() < -1e-7 * (1.0 + b0_.lpNorm<Eigen::Infinity>()))
      return SolveStatus::numeric_failure;
    y = y.cwiseMax(0.0);

    const index_t n = model_.num_vars();
    res.primal.resize(n);
    for (index_t j = 0; j < n; ++j) {
      const auto& cm = map_[static_cast<std::size_t>(j)];
      double v = cm.offset;
      if (cm.pos >= 0) v += y(cm.pos);
      if (cm.neg >= 0) v -= y(cm.neg);
      res.primal(j) = v;
    }
    res.objective_value = model_.objective().evaluate(res.primal);
    const double dir = model_.objective_sense() == ObjSense::minimize ? 1.0 : -1.0;
    res.row_dual.resize(model_.num_rows());
    for (index_t r = 0; r < model_.num_rows(); ++r) {
      double pi = -t_(m_, track0_ + r);
      res.row_dual(r) = dir * flip_[static_cast<std::size_t>(r)] * pi;
    }
    return SolveStatus::optimal;
  }

  const ModelBuilder& model_;
  SolveOptions options_;
  std::vector<ColumnMap> map_;
  std::vector<double> flip_;
  std::vector<index_t> basis_;
  std::vector<bool> dead_;
  index_t nstruct_ = 0, m_ = 0, slack0_ = 0, art0_ = 0, track0_ = 0, ntot_ = 0, rhs_ = 0;
  matrix_t a0_;
  vector_t b0_, cost_;
  tableau_t t_;
};

class DenseSession final : public LpSession {
 public:
  DenseSession(const ModelBuilder& model, const SolveOptions& options) : model_(model), options_(options) {}
  SolveResult solve() override { return DenseSimplex(model_, options_).run(); }
  void sync_rows() override {}

 private:
  const ModelBuilder& model_;
  SolveOptions options_;
};

}  // namespace

std::unique_ptr<LpSession> DenseSimplexBackend::open(const ModelBuilder& model, const SolveOptions& options) const {
  return std::make_unique<DenseSession>(model, options);
}

}  // namespace cdro::lp
