#include "dense_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mgrid::milp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Consecutive zero-length steps before switching to Bland's rule.
constexpr std::size_t kDegenerateLimit = 60;
// Pivots applied to one tableau before it is rebuilt from the original rows.
constexpr std::size_t kRefreshPivots = 1500;
constexpr double kDropTol = 1e-13;
// Tableau entries beyond this mean an ill-conditioned basis; results from it
// are re-derived from a fresh tableau.
constexpr double kGrowthLimit = 1e8;

}  // namespace

DenseSimplex::DenseSimplex(const MilpProblem& problem, double feasibility_tol)
    : feas_tol_(feasibility_tol) {
  n_struct_ = problem.num_variables();
  struct_cost_.assign(problem.objective().begin(), problem.objective().end());
  objective_constant_ = problem.objective_constant();
  struct_lb_.reserve(n_struct_);
  struct_ub_.reserve(n_struct_);
  for (const auto& v : problem.variables()) {
    struct_lb_.push_back(v.lower);
    struct_ub_.push_back(v.upper);
  }
  rows_.reserve(problem.num_constraints());
  for (const auto& c : problem.constraints()) {
    Row row{{}, c.sense, c.rhs};
    row.terms.reserve(c.terms.size());
    for (const auto& t : c.terms) {
      if (t.coef != 0.0) row.terms.emplace_back(t.var.index, t.coef);
    }
    rows_.push_back(std::move(row));
  }
}

void DenseSimplex::set_bounds(std::size_t var, double lower, double upper) {
  struct_lb_[var] = lower;
  struct_ub_[var] = upper;
  if (!built_) return;
  lb_[var] = lower;
  ub_[var] = upper;
  if (state_[var] != State::Basic) place_nonbasic(var);
}

void DenseSimplex::place_nonbasic(std::size_t col) {
  if (fixed(col) || d_[col] >= 0.0) {
    state_[col] = State::AtLower;
    x_[col] = lb_[col];
  } else {
    state_[col] = State::AtUpper;
    x_[col] = ub_[col];
  }
}

void DenseSimplex::build() {
  m_ = rows_.size();
  std::size_t n_slack = 0;
  for (const auto& r : rows_) n_slack += r.sense != Sense::Equal ? 1 : 0;

  // Residual of each row with every structural at its lower bound decides
  // whether the slack can start basic or an artificial is needed.
  std::vector<double> residual(m_);
  std::vector<bool> needs_art(m_, false);
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m_; ++i) {
    double r = rows_[i].rhs;
    for (const auto& [j, a] : rows_[i].terms) r -= a * struct_lb_[j];
    residual[i] = r;
    const auto sense = rows_[i].sense;
    const bool slack_ok = (sense == Sense::LessEqual && r >= 0.0) || (sense == Sense::GreaterEqual && r <= 0.0);
    if (!slack_ok) {
      needs_art[i] = true;
      ++n_art;
    }
  }

  first_artificial_ = n_struct_ + n_slack;
  n_ = first_artificial_ + n_art;
  width_ = n_ + 1;
  tab_.assign(m_ * width_, 0.0);
  lb_.assign(n_, 0.0);
  ub_.assign(n_, kInf);
  x_.assign(n_, 0.0);
  state_.assign(n_, State::AtLower);
  basis_.assign(m_, 0);
  d_.assign(n_, 0.0);
  cost_.assign(n_, 0.0);
  for (std::size_t j = 0; j < n_struct_; ++j) {
    lb_[j] = struct_lb_[j];
    ub_[j] = struct_ub_[j];
    x_[j] = lb_[j];
  }

  std::size_t slack = n_struct_;
  std::size_t art = first_artificial_;
  for (std::size_t i = 0; i < m_; ++i) {
    const auto& row = rows_[i];
    double slack_coef = 0.0;
    std::size_t slack_col = n_;
    if (row.sense != Sense::Equal) {
      slack_col = slack++;
      slack_coef = row.sense == Sense::LessEqual ? 1.0 : -1.0;
    }
    double mult = 1.0;
    std::size_t basic = 0;
    if (needs_art[i]) {
      mult = residual[i] >= 0.0 ? 1.0 : -1.0;
      basic = art++;
      at(i, basic) = 1.0;
    } else {
      mult = slack_coef;
      basic = slack_col;
    }
    for (const auto& [j, a] : row.terms) at(i, j) += mult * a;
    if (slack_col < n_) at(i, slack_col) = mult * slack_coef;
    at(i, n_) = mult * row.rhs;
    basis_[i] = basic;
    state_[basic] = State::Basic;
  }
  recompute_basics();
  since_refresh_ = 0;
  unstable_ = false;
}

void DenseSimplex::compute_reduced_costs() {
  d_.assign(cost_.begin(), cost_.end());
  for (std::size_t i = 0; i < m_; ++i) {
    const double cb = cost_[basis_[i]];
    if (cb == 0.0) continue;
    const double* row = &tab_[i * width_];
    for (std::size_t j = 0; j < n_; ++j) d_[j] -= cb * row[j];
  }
  for (std::size_t i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
}

void DenseSimplex::recompute_basics() {
  std::vector<std::size_t> moved;
  for (std::size_t j = 0; j < n_; ++j) {
    if (state_[j] != State::Basic && x_[j] != 0.0) moved.push_back(j);
  }
  for (std::size_t i = 0; i < m_; ++i) {
    const double* row = &tab_[i * width_];
    double v = row[n_];
    for (std::size_t j : moved) v -= row[j] * x_[j];
    x_[basis_[i]] = v;
  }
}

void DenseSimplex::pivot(std::size_t r, std::size_t q) {
  double* pr = &tab_[r * width_];
  const double inv = 1.0 / pr[q];
  row_nz_.clear();
  double growth = 0.0;
  for (std::size_t j = 0; j < width_; ++j) {
    if (pr[j] == 0.0) continue;
    pr[j] *= inv;
    const double mag = std::abs(pr[j]);
    if (mag < kDropTol) {
      pr[j] = 0.0;
    } else {
      row_nz_.push_back(j);
      if (j < n_) growth = std::max(growth, mag);
    }
  }
  if (growth > kGrowthLimit) unstable_ = true;
  pr[q] = 1.0;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == r) continue;
    double* pi = &tab_[i * width_];
    const double f = pi[q];
    if (f == 0.0) continue;
    for (std::size_t j : row_nz_) {
      double v = pi[j] - f * pr[j];
      pi[j] = std::abs(v) < kDropTol ? 0.0 : v;
    }
    pi[q] = 0.0;
  }
  const double fd = d_[q];
  if (fd != 0.0) {
    for (std::size_t j : row_nz_) {
      if (j < n_) d_[j] -= fd * pr[j];
    }
  }
  d_[q] = 0.0;
  const std::size_t leaving = basis_[r];
  basis_[r] = q;
  state_[q] = State::Basic;
  (void)leaving;
  ++iterations_;
  ++since_refresh_;
}

LpStatus DenseSimplex::primal() {
  const std::size_t limit = 50 * (m_ + n_) + 10000;
  std::size_t degenerate = 0;
  bool bland = false;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > limit) {
      std::ostringstream msg;
      msg << "primal simplex made no progress after " << iter << " iterations on " << m_ << " rows x " << n_
          << " columns";
      detail_ = msg.str();
      return LpStatus::Stalled;
    }

    // Entering column: Dantzig pricing, or the first eligible column under
    // Bland's rule.
    std::size_t q = n_;
    double best = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == State::Basic || fixed(j)) continue;
      double viol = 0.0;
      if (state_[j] == State::AtLower && d_[j] < -opt_tol_) viol = -d_[j];
      if (state_[j] == State::AtUpper && d_[j] > opt_tol_) viol = d_[j];
      if (viol <= 0.0) continue;
      if (bland) {
        q = j;
        break;
      }
      if (viol > best) {
        best = viol;
        q = j;
      }
    }
    if (q == n_) return LpStatus::Optimal;

    const double dir = state_[q] == State::AtLower ? 1.0 : -1.0;
    const double flip = ub_[q] - lb_[q];

    // Ratio test. Harris two-pass unless Bland's rule is active.
    std::size_t r = m_;
    double step = kInf;
    if (bland) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, q) * dir;
        if (std::abs(a) <= pivot_tol_) continue;
        const std::size_t b = basis_[i];
        double lim = kInf;
        if (a > 0.0) lim = std::max(0.0, x_[b] - lb_[b]) / a;
        else if (ub_[b] < kInf) lim = std::max(0.0, ub_[b] - x_[b]) / -a;
        if (lim < step || (lim == step && r < m_ && b < basis_[r])) {
          step = lim;
          r = i;
        }
      }
    } else {
      double bound = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, q) * dir;
        if (std::abs(a) <= pivot_tol_) continue;
        const std::size_t b = basis_[i];
        if (a > 0.0) bound = std::min(bound, (std::max(0.0, x_[b] - lb_[b]) + feas_tol_) / a);
        else if (ub_[b] < kInf) bound = std::min(bound, (std::max(0.0, ub_[b] - x_[b]) + feas_tol_) / -a);
      }
      double best_alpha = 0.0;
      for (std::size_t i = 0; i < m_ && bound < kInf; ++i) {
        const double a = at(i, q) * dir;
        if (std::abs(a) <= pivot_tol_) continue;
        const std::size_t b = basis_[i];
        double lim = kInf;
        if (a > 0.0) lim = std::max(0.0, x_[b] - lb_[b]) / a;
        else if (ub_[b] < kInf) lim = std::max(0.0, ub_[b] - x_[b]) / -a;
        if (lim <= bound && std::abs(a) > best_alpha) {
          best_alpha = std::abs(a);
          step = lim;
          r = i;
        }
      }
    }

    if (r == m_ && flip == kInf) {
      std::ostringstream msg;
      msg << "column " << q << " improves the objective without bound";
      detail_ = msg.str();
      return LpStatus::Unbounded;
    }

    const bool do_flip = flip <= step;
    if (do_flip) step = flip;
    if (step > 1e-12) {
      degenerate = 0;
      bland = false;
    } else if (++degenerate > kDegenerateLimit) {
      bland = true;
    }

    if (step != 0.0) {
      const double delta = dir * step;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, q);
        if (a != 0.0) x_[basis_[i]] -= a * delta;
      }
    }
    if (do_flip) {
      state_[q] = state_[q] == State::AtLower ? State::AtUpper : State::AtLower;
      x_[q] = state_[q] == State::AtLower ? lb_[q] : ub_[q];
      continue;
    }
    x_[q] += dir * step;
    const std::size_t b = basis_[r];
    const bool to_lower = at(r, q) * dir > 0.0;
    state_[b] = to_lower ? State::AtLower : State::AtUpper;
    x_[b] = to_lower ? lb_[b] : ub_[b];
    pivot(r, q);
  }
}

LpStatus DenseSimplex::dual() {
  const std::size_t limit = 50 * (m_ + n_) + 10000;
  std::size_t degenerate = 0;
  bool bland = false;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > limit) {
      std::ostringstream msg;
      msg << "dual simplex made no progress after " << iter << " iterations on " << m_ << " rows x " << n_
          << " columns";
      detail_ = msg.str();
      return LpStatus::Stalled;
    }

    std::size_t r = m_;
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t b = basis_[i];
      double inf = 0.0;
      if (x_[b] < lb_[b] - feas_tol_) inf = lb_[b] - x_[b];
      else if (x_[b] > ub_[b] + feas_tol_) inf = x_[b] - ub_[b];
      if (inf <= 0.0) continue;
      if (bland) {
        if (r == m_ || b < basis_[r]) r = i;
      } else if (inf > worst) {
        worst = inf;
        r = i;
      }
    }
    if (r == m_) return LpStatus::Optimal;

    const std::size_t b = basis_[r];
    const bool up = x_[b] < lb_[b];
    const double target = up ? lb_[b] : ub_[b];
    const double* pr = &tab_[r * width_];

    auto eligible = [&](std::size_t j) {
      if (state_[j] == State::Basic || fixed(j)) return false;
      const double a = pr[j];
      if (std::abs(a) <= pivot_tol_) return false;
      const bool at_lower = state_[j] == State::AtLower;
      return up ? ((at_lower && a < 0.0) || (!at_lower && a > 0.0))
                : ((at_lower && a > 0.0) || (!at_lower && a < 0.0));
    };
    auto dual_slack = [&](std::size_t j) {
      return state_[j] == State::AtLower ? std::max(0.0, d_[j]) : std::max(0.0, -d_[j]);
    };

    std::size_t q = n_;
    double ratio = kInf;
    if (bland) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (!eligible(j)) continue;
        const double t = dual_slack(j) / std::abs(pr[j]);
        if (t < ratio) {
          ratio = t;
          q = j;
        }
      }
    } else {
      double bound = kInf;
      for (std::size_t j = 0; j < n_; ++j) {
        if (eligible(j)) bound = std::min(bound, (dual_slack(j) + opt_tol_) / std::abs(pr[j]));
      }
      double best_alpha = 0.0;
      for (std::size_t j = 0; j < n_ && bound < kInf; ++j) {
        if (!eligible(j)) continue;
        const double t = dual_slack(j) / std::abs(pr[j]);
        if (t <= bound && std::abs(pr[j]) > best_alpha) {
          best_alpha = std::abs(pr[j]);
          ratio = t;
          q = j;
        }
      }
    }
    if (q == n_) {
      std::ostringstream msg;
      msg << "row " << r << " cannot be made feasible";
      detail_ = msg.str();
      return LpStatus::Infeasible;
    }

    if (ratio > 1e-12) {
      degenerate = 0;
      bland = false;
    } else if (++degenerate > kDegenerateLimit) {
      bland = true;
    }

    const double delta = (x_[b] - target) / pr[q];
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, q);
      if (a != 0.0) x_[basis_[i]] -= a * delta;
    }
    x_[q] += delta;
    x_[b] = target;
    state_[b] = up ? State::AtLower : State::AtUpper;
    if (fixed(b)) state_[b] = State::AtLower;
    pivot(r, q);
  }
}

bool DenseSimplex::remove_artificials() {
  std::vector<bool> drop_row(m_, false);
  for (std::size_t r = 0; r < m_; ++r) {
    const std::size_t b = basis_[r];
    if (b < first_artificial_) continue;
    std::size_t q = first_artificial_;
    double best = 1e-7;
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      if (state_[j] == State::Basic) continue;
      const double a = std::abs(at(r, j));
      if (a > best) {
        best = a;
        q = j;
      }
    }
    if (q == first_artificial_) {
      drop_row[r] = true;
      continue;
    }
    // Degenerate exchange: the entering column keeps its bound value.
    x_[b] = 0.0;
    state_[b] = State::AtLower;
    pivot(r, q);
  }

  std::size_t new_m = 0;
  for (std::size_t r = 0; r < m_; ++r) new_m += drop_row[r] ? 0 : 1;
  const std::size_t new_n = first_artificial_;
  const std::size_t new_width = new_n + 1;
  std::vector<double> tab(new_m * new_width);
  std::vector<std::size_t> basis;
  basis.reserve(new_m);
  std::size_t k = 0;
  for (std::size_t r = 0; r < m_; ++r) {
    if (drop_row[r]) continue;
    const double* src = &tab_[r * width_];
    double* dst = &tab[k * new_width];
    std::copy(src, src + new_n, dst);
    dst[new_n] = src[n_];
    basis.push_back(basis_[r]);
    ++k;
  }
  tab_ = std::move(tab);
  basis_ = std::move(basis);
  m_ = new_m;
  n_ = new_n;
  width_ = new_width;
  lb_.resize(n_);
  ub_.resize(n_);
  x_.resize(n_);
  state_.resize(n_);
  d_.resize(n_);
  cost_.resize(n_);
  recompute_basics();
  return true;
}

LpStatus DenseSimplex::solve() {
  built_ = false;
  build();
  if (first_artificial_ < n_) {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (std::size_t j = first_artificial_; j < n_; ++j) cost_[j] = 1.0;
    compute_reduced_costs();
    const auto st = primal();
    if (st == LpStatus::Stalled) return st;
    double worst = 0.0;
    for (std::size_t j = first_artificial_; j < n_; ++j) worst = std::max(worst, x_[j]);
    if (worst > feas_tol_) {
      std::ostringstream msg;
      msg << "phase 1 ended with artificial value " << worst;
      detail_ = msg.str();
      return LpStatus::Infeasible;
    }
    remove_artificials();
  }
  std::fill(cost_.begin(), cost_.end(), 0.0);
  std::copy(struct_cost_.begin(), struct_cost_.end(), cost_.begin());
  compute_reduced_costs();
  const auto st = primal();
  built_ = st == LpStatus::Optimal;
  return st;
}

LpStatus DenseSimplex::reoptimize() {
  if (!built_ || unstable_ || since_refresh_ > kRefreshPivots) return solve();
  recompute_basics();
  auto st = dual();
  if (st == LpStatus::Optimal) st = primal();
  if (unstable_ || st == LpStatus::Stalled || st == LpStatus::Unbounded) return solve();
  return st;
}

double DenseSimplex::objective() const {
  double z = objective_constant_;
  for (std::size_t j = 0; j < n_struct_; ++j) z += struct_cost_[j] * x_[j];
  return z;
}

std::vector<double> DenseSimplex::values() const { return {x_.begin(), x_.begin() + static_cast<long>(n_struct_)}; }

}  // namespace mgrid::milp::detail
