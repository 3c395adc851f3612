#pragma once

#include "mgrid/milp.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mgrid::milp::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded, Stalled };

// Bounded-variable simplex on a dense tableau B^-1 [A | b].
//
// Columns are [structurals | slacks | artificials]. Every row gets a slack
// (inequalities) or nothing (equalities); artificials exist only between
// phase 1 and the end of solve(), after which they are compacted away.
// Redundant equality rows found while driving artificials out are dropped.
//
// Once solve() has produced an optimal basis, structural bounds may be
// changed with set_bounds() and the LP re-optimized by reoptimize(), which
// runs the dual simplex from the current basis. Structural variables are
// required to have finite bounds, so nonbasic columns can always be placed at
// the bound matching the sign of their reduced cost and the basis stays dual
// feasible across bound changes.
class DenseSimplex {
 public:
  DenseSimplex(const MilpProblem& problem, double feasibility_tol);

  void set_bounds(std::size_t var, double lower, double upper);
  [[nodiscard]] double lower(std::size_t var) const { return struct_lb_[var]; }
  [[nodiscard]] double upper(std::size_t var) const { return struct_ub_[var]; }

  // Two-phase primal simplex from a slack/artificial basis.
  LpStatus solve();
  // Dual simplex from the last basis; falls back to solve() when the basis
  // cannot be made dual feasible or was never built.
  LpStatus reoptimize();

  [[nodiscard]] double objective() const;
  [[nodiscard]] std::vector<double> values() const;
  [[nodiscard]] double value(std::size_t var) const { return x_[var]; }
  [[nodiscard]] std::size_t iterations() const { return iterations_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }
  [[nodiscard]] bool has_basis() const { return built_; }

 private:
  enum class State : std::uint8_t { Basic, AtLower, AtUpper };

  void build();
  void compute_reduced_costs();
  void recompute_basics();
  void pivot(std::size_t row, std::size_t col);
  LpStatus primal();
  LpStatus dual();
  bool remove_artificials();
  void place_nonbasic(std::size_t col);
  [[nodiscard]] bool fixed(std::size_t col) const { return ub_[col] - lb_[col] <= 0.0; }
  [[nodiscard]] double& at(std::size_t row, std::size_t col) { return tab_[row * width_ + col]; }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return tab_[row * width_ + col]; }

  struct Row {
    std::vector<std::pair<std::size_t, double>> terms;
    Sense sense;
    double rhs;
  };

  std::vector<Row> rows_;
  std::vector<double> struct_cost_;
  std::vector<double> struct_lb_;
  std::vector<double> struct_ub_;
  double objective_constant_ = 0.0;
  std::size_t n_struct_ = 0;

  std::size_t m_ = 0;      // live rows
  std::size_t n_ = 0;      // live columns
  std::size_t width_ = 0;  // n_ + 1, last column holds B^-1 b
  std::size_t first_artificial_ = 0;
  std::vector<double> tab_;
  std::vector<double> d_;
  std::vector<double> cost_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<double> x_;
  std::vector<State> state_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> row_nz_;

  double feas_tol_;
  double opt_tol_ = 1e-9;
  double pivot_tol_ = 1e-9;
  std::size_t iterations_ = 0;
  std::size_t since_refresh_ = 0;
  bool built_ = false;
  bool unstable_ = false;
  std::string detail_;
};

}  // namespace mgrid::milp::detail
