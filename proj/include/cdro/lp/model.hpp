#pragma once

#include "cdro/types.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cdro::lp {

/** Variable handle; valid only for the builder that created it */
struct Var {
  index_t id = -1;
  bool valid() const { return id >= 0; }
};

/** Row handle */
struct Row {
  index_t id = -1;
  bool valid() const { return id >= 0; }
};

/** Affine form sum_j coef_j * x_j + constant */
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(implicit)
  LinExpr(Var v, double coef = 1.0) { add(v, coef); }  // NOLINT(implicit)

  LinExpr& add(Var v, double coef) {
    if (coef != 0.0) terms_.emplace_back(v.id, coef);
    return *this;
  }
  LinExpr& add(const LinExpr& e, double scale = 1.0);
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  double constant() const { return constant_; }
  const std::vector<std::pair<index_t, double>>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  /** Merge duplicate handles and drop zero coefficients; terms end up sorted by handle */
  LinExpr& compress();

  double evaluate(const vector_t& x) const;

  LinExpr& operator+=(const LinExpr& e) { return add(e, 1.0); }
  LinExpr& operator-=(const LinExpr& e) { return add(e, -1.0); }
  LinExpr& operator*=(double s);

 private:
  double constant_ = 0.0;
  std::vector<std::pair<index_t, double>> terms_;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a);
LinExpr operator*(LinExpr a, double s);
LinExpr operator*(double s, LinExpr a);

enum class Sense { le, ge, eq };
enum class ObjSense { minimize, maximize };

class ModelBuilder;

/**
 * Lazy row source. Called after each optimal solve with the primal point; returns the
 * number of rows it appended to the model. Zero means the point is accepted.
 */
class RowGenerator {
 public:
  virtual ~RowGenerator() = default;
  virtual std::size_t separate(const vector_t& primal, ModelBuilder& model) = 0;
};

class ModelBuilder {
 public:
  Var add_var(double lo, double hi, std::string name = {});
  std::vector<Var> add_vars(index_t count, double lo, double hi, const std::string& prefix = {});

  /** lhs (sense) rhs; constants of lhs are moved to the right-hand side */
  Row add_row(const LinExpr& lhs, Sense sense, double rhs, std::string name = {});
  Row add_row(const LinExpr& lhs, Sense sense, const LinExpr& rhs, std::string name = {});

  /** Second-order cone ||x_1..x_k||_2 <= x_0 */
  void add_cone(std::vector<Var> vars);

  void set_objective(const LinExpr& objective, ObjSense sense);
  void add_lazy(std::shared_ptr<RowGenerator> gen) { lazy_.push_back(std::move(gen)); }

  void set_bounds(Var v, double lo, double hi);

  index_t num_vars() const { return static_cast<index_t>(lo_.size()); }
  index_t num_rows() const { return static_cast<index_t>(sense_.size()); }
  index_t num_nonzeros() const { return static_cast<index_t>(col_.size()); }
  bool has_cones() const { return !cones_.empty(); }

  double lower(index_t j) const { return lo_[static_cast<std::size_t>(j)]; }
  double upper(index_t j) const { return hi_[static_cast<std::size_t>(j)]; }
  const std::string& var_name(index_t j) const { return var_names_[static_cast<std::size_t>(j)]; }
  const std::string& row_name(index_t r) const { return row_names_[static_cast<std::size_t>(r)]; }

  Sense row_sense(index_t r) const { return sense_[static_cast<std::size_t>(r)]; }
  double row_rhs(index_t r) const { return rhs_[static_cast<std::size_t>(r)]; }
  index_t row_begin(index_t r) const { return start_[static_cast<std::size_t>(r)]; }
  index_t row_end(index_t r) const { return start_[static_cast<std::size_t>(r) + 1]; }
  index_t entry_col(index_t k) const { return col_[static_cast<std::size_t>(k)]; }
  double entry_val(index_t k) const { return val_[static_cast<std::size_t>(k)]; }

  const LinExpr& objective() const { return objective_; }
  ObjSense objective_sense() const { return obj_sense_; }
  const std::vector<std::vector<Var>>& cones() const { return cones_; }
  const std::vector<std::shared_ptr<RowGenerator>>& lazy() const { return lazy_; }

  /** Dense copy of the constraint matrix; intended for small models only */
  matrix_t dense_matrix() const;

  /** LP text dump with deterministic ordering */
  void write_lp(std::ostream& os) const;

 private:
  void check(index_t id) const;

  std::vector<double> lo_, hi_;
  std::vector<std::string> var_names_;
  std::vector<Sense> sense_;
  std::vector<double> rhs_;
  std::vector<std::string> row_names_;
  std::vector<index_t> start_{0};
  std::vector<index_t> col_;
  std::vector<double> val_;
  LinExpr objective_;
  ObjSense obj_sense_ = ObjSense::minimize;
  std::vector<std::vector<Var>> cones_;
  std::vector<std::shared_ptr<RowGenerator>> lazy_;
};

enum class SolveStatus { optimal, infeasible, unbounded, numeric_failure, time_limit };

const char* to_string(SolveStatus s);

struct SolveOptions {
  double time_limit = kInf;     // seconds
  double tolerance = 1e-9;      // primal/dual feasibility
  int max_rounds = 200;         // lazy separation rounds
  std::string algorithm = "choose";  // choose, simplex or ipm; adapters without a choice ignore it
  std::string dump_path;        // LP text dump when nonempty
};

struct SolveResult {
  SolveStatus status = SolveStatus::numeric_failure;
  double objective_value = 0.0;  // meaningful only when optimal
  vector_t primal;
  vector_t row_dual;  // d objective / d rhs
  double wall_time = 0.0;
  int rounds = 1;
  std::string message;

  bool optimal() const { return status == SolveStatus::optimal; }
  double value(Var v) const { return primal(v.id); }
  double value(const LinExpr& e) const { return e.evaluate(primal); }
  double dual(Row r) const { return row_dual(r.id); }
};

/** Incremental solve handle; rows appended to the model after open() are picked up by sync_rows() */
class LpSession {
 public:
  virtual ~LpSession() = default;
  virtual SolveResult solve() = 0;
  virtual void sync_rows() = 0;
};

class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual std::string name() const = 0;
  virtual bool supports_cones() const { return false; }
  virtual std::unique_ptr<LpSession> open(const ModelBuilder& model, const SolveOptions& options) const = 0;
};

/** "simplex" (built-in dense) or "highs"; unknown or unavailable names raise ConfigError */
std::unique_ptr<LpBackend> make_backend(const std::string& name);
std::vector<std::string> available_backends();

/** Solve with lazy-row separation until every registered generator accepts the point */
SolveResult solve(ModelBuilder& model, const LpBackend& backend, const SolveOptions& options = {});

}  // namespace cdro::lp
