#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mgrid::milp {

// Big-M for indicator-style constraints. Every variable bound and every
// piecewise activation bound in a problem must stay within [-kBigM, kBigM].
inline constexpr double kBigM = 100.0;

enum class VarKind { Continuous, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct VarId {
  std::size_t index = 0;
  friend bool operator==(VarId, VarId) = default;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Variable {
  double lower = 0.0;
  double upper = 0.0;
  VarKind kind = VarKind::Continuous;
  std::string name;
  // Branch-and-bound branches on fractional binaries of the highest priority
  // present before looking at lower ones.
  int branch_priority = 0;
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  std::string name;
};

// Ordered binaries of which at most one may be 1, e.g. the segment choice of
// a piecewise-linear function. Weights order the members (strictly
// increasing). Branch-and-bound splits a fractional set at the LP's weighted
// position rather than branching on members one at a time.
struct Sos1 {
  std::vector<VarId> members;
  std::vector<double> weights;
};

// Minimization problem over bounded continuous and binary variables.
class MilpProblem {
 public:
  VarId add_variable(double lower, double upper, VarKind kind = VarKind::Continuous,
                     std::string name = {});
  VarId add_binary(std::string name = {}) { return add_variable(0.0, 1.0, VarKind::Binary, std::move(name)); }

  void add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  // Adds to the existing objective coefficient.
  void add_objective(VarId var, double coef);
  void add_objective_constant(double value) { objective_constant_ += value; }

  void set_bounds(VarId var, double lower, double upper);
  void set_branch_priority(VarId var, int priority) { variables_.at(var.index).branch_priority = priority; }
  // Declares a branching set. The caller still adds whatever rows make at
  // most one member 1; this only informs the search.
  void add_sos1(std::vector<VarId> members, std::vector<double> weights);

  [[nodiscard]] std::size_t num_variables() const { return variables_.size(); }
  [[nodiscard]] std::size_t num_constraints() const { return constraints_.size(); }
  [[nodiscard]] std::size_t num_binaries() const;

  [[nodiscard]] const Variable& variable(VarId var) const { return variables_.at(var.index); }
  [[nodiscard]] std::span<const Variable> variables() const { return variables_; }
  [[nodiscard]] std::span<const Constraint> constraints() const { return constraints_; }
  [[nodiscard]] std::span<const Sos1> sos1_sets() const { return sos1_; }
  [[nodiscard]] std::span<const double> objective() const { return objective_; }
  [[nodiscard]] double objective_constant() const { return objective_constant_; }

  // Objective value of a full assignment, constant included.
  [[nodiscard]] double evaluate(std::span<const double> values) const;

  // Largest violation of any row or bound by `values`, ignoring integrality.
  [[nodiscard]] double max_violation(std::span<const double> values) const;

  // Throws InputError when bounds are non-finite or inverted, when a binary
  // is bounded outside [0,1], when a term references an unknown variable, or
  // when a branching set is malformed or overlaps another.
  void validate() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<Sos1> sos1_;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, NumericalError };

[[nodiscard]] const char* to_string(SolveStatus status);

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double gap = 0.0;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  // Set for NumericalError: what the simplex was doing when it gave up.
  std::string detail;

  [[nodiscard]] bool has_solution() const { return !values.empty(); }
  [[nodiscard]] double value(VarId var) const { return values.at(var.index); }
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  double relative_gap = 1e-6;
  std::size_t node_limit = 1'000'000;
  bool deterministic = true;
  // Node LPs solved concurrently per round; 1 keeps everything sequential.
  unsigned threads = 1;
};

// LP relaxation (binaries treated as continuous in their bounds).
[[nodiscard]] MilpSolution solve_lp(const MilpProblem& problem, const SolverOptions& options = {});

// Best-first branch-and-bound over the binaries. Within the highest branch
// priority that has a fractional binary, branches on the most fractional
// binary or on the most evenly split branching set, ties to the lowest index.
[[nodiscard]] MilpSolution solve_milp(const MilpProblem& problem, const SolverOptions& options = {});

struct Breakpoint {
  double x = 0.0;
  double y = 0.0;
};

// Continuous piecewise-linear function through ordered breakpoints.
class PiecewiseCurve {
 public:
  PiecewiseCurve() = default;
  explicit PiecewiseCurve(std::vector<Breakpoint> points);

  [[nodiscard]] std::span<const Breakpoint> points() const { return points_; }
  [[nodiscard]] std::size_t segments() const { return points_.empty() ? 0 : points_.size() - 1; }
  [[nodiscard]] double x_min() const { return points_.front().x; }
  [[nodiscard]] double x_max() const { return points_.back().x; }

  // Linear interpolation; throws InputError outside [x_min, x_max].
  [[nodiscard]] double operator()(double x) const;

  // Same curve with every y multiplied by `factor`.
  [[nodiscard]] PiecewiseCurve scaled(double factor) const;

 private:
  std::vector<Breakpoint> points_;
};

enum class PiecewiseForm {
  // One binary and one interpolation weight per segment; weight_b <= z_b.
  // LP relaxation is the convex hull of the graph.
  ConvexCombination,
  // One binary and one interpolation weight per segment, each segment's
  // interpolation tied to (x, y) through Big-M activation rows.
  BigM,
};

struct PiecewiseEncoding {
  VarId y;
  std::vector<VarId> segment;  // z_b
  std::vector<VarId> weight;   // position inside segment b, in [0,1]
};

// Adds y = curve(x) with one binary per segment and sum(z) = 1. Throws
// InputError if x's bounds leave the curve domain, or, for the Big-M form, if
// the curve does not fit under kBigM.
PiecewiseEncoding encode_piecewise(MilpProblem& problem, VarId x, const PiecewiseCurve& curve,
                                   PiecewiseForm form = PiecewiseForm::ConvexCombination,
                                   const std::string& name = "pw");

// Plain-text dump in a CPLEX-LP-like layout (Minimize / Subject To / Bounds /
// Binaries / End). Write-only; not meant to be parsed back.
void write_lp_format(std::ostream& out, const MilpProblem& problem);

}  // namespace mgrid::milp
