#include "mgrid/error.hpp"
#include "mgrid/milp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace mgrid::milp {

VarId MilpProblem::add_variable(double lower, double upper, VarKind kind, std::string name) {
  VarId id{variables_.size()};
  if (name.empty()) name = "x" + std::to_string(id.index);
  variables_.push_back({lower, upper, kind, std::move(name)});
  objective_.push_back(0.0);
  return id;
}

void MilpProblem::add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
  if (name.empty()) name = "c" + std::to_string(constraints_.size());
  constraints_.push_back({std::move(terms), sense, rhs, std::move(name)});
}

void MilpProblem::add_sos1(std::vector<VarId> members, std::vector<double> weights) {
  sos1_.push_back({std::move(members), std::move(weights)});
}

void MilpProblem::add_objective(VarId var, double coef) { objective_.at(var.index) += coef; }

void MilpProblem::set_bounds(VarId var, double lower, double upper) {
  auto& v = variables_.at(var.index);
  v.lower = lower;
  v.upper = upper;
}

std::size_t MilpProblem::num_binaries() const {
  return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

double MilpProblem::evaluate(std::span<const double> values) const {
  double z = objective_constant_;
  for (std::size_t j = 0; j < objective_.size(); ++j) z += objective_[j] * values[j];
  return z;
}

double MilpProblem::max_violation(std::span<const double> values) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max({worst, variables_[j].lower - values[j], values[j] - variables_[j].upper});
  }
  for (const auto& c : constraints_) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * values[t.var.index];
    switch (c.sense) {
      case Sense::LessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Sense::GreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Sense::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

void MilpProblem::validate() const {
  for (const auto& v : variables_) {
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw InputError("variable " + v.name + " has a non-finite bound");
    }
    if (v.lower > v.upper) throw InputError("variable " + v.name + " has lower bound above upper bound");
    if (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw InputError("binary variable " + v.name + " has bounds outside [0,1]");
    }
  }
  for (const auto& c : constraints_) {
    if (!std::isfinite(c.rhs)) throw InputError("constraint " + c.name + " has a non-finite right-hand side");
    for (const auto& t : c.terms) {
      if (t.var.index >= variables_.size()) {
        throw InputError("constraint " + c.name + " references an undeclared variable");
      }
      if (!std::isfinite(t.coef)) throw InputError("constraint " + c.name + " has a non-finite coefficient");
    }
  }
  for (double c : objective_) {
    if (!std::isfinite(c)) throw InputError("objective has a non-finite coefficient");
  }
  std::vector<bool> in_set(variables_.size(), false);
  for (const auto& set : sos1_) {
    if (set.members.size() < 2 || set.members.size() != set.weights.size()) {
      throw InputError("branching set needs at least two members and one weight per member");
    }
    for (std::size_t i = 0; i < set.members.size(); ++i) {
      const auto j = set.members[i].index;
      if (j >= variables_.size() || variables_[j].kind != VarKind::Binary) {
        throw InputError("branching set members must be declared binaries");
      }
      if (in_set[j]) throw InputError("binary " + variables_[j].name + " appears in two branching sets");
      in_set[j] = true;
      if (i > 0 && !(set.weights[i] > set.weights[i - 1])) {
        throw InputError("branching set weights must be strictly increasing");
      }
    }
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapLimit: return "gap-limit";
    case SolveStatus::NumericalError: return "numerical-error";
  }
  return "unknown";
}

PiecewiseCurve::PiecewiseCurve(std::vector<Breakpoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw InputError("piecewise curve needs at least two breakpoints");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y)) {
      throw InputError("piecewise curve has a non-finite breakpoint");
    }
    if (i > 0 && !(points_[i].x > points_[i - 1].x)) {
      throw InputError("piecewise curve breakpoints must have strictly increasing x");
    }
  }
}

double PiecewiseCurve::operator()(double x) const {
  if (!(x >= x_min() && x <= x_max())) {
    std::ostringstream msg;
    msg << "value " << x << " outside curve domain [" << x_min() << ", " << x_max() << "]";
    throw InputError(msg.str());
  }
  // First segment whose right end reaches x; breakpoints hit exactly return
  // the stored y so adjacent segments agree.
  auto it = std::lower_bound(points_.begin(), points_.end(), x,
                             [](const Breakpoint& p, double v) { return p.x < v; });
  if (it->x == x) return it->y;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.y + t * (hi.y - lo.y);
}

PiecewiseCurve PiecewiseCurve::scaled(double factor) const {
  auto pts = points_;
  for (auto& p : pts) p.y *= factor;
  return PiecewiseCurve(std::move(pts));
}

namespace {

void write_term(std::ostream& out, double coef, const std::string& name, bool first) {
  if (coef < 0) {
    out << (first ? "- " : " - ");
  } else if (!first) {
    out << " + ";
  }
  const double mag = std::abs(coef);
  if (mag != 1.0) out << mag << ' ';
  out << name;
}

}  // namespace

void write_lp_format(std::ostream& out, const MilpProblem& problem) {
  const auto vars = problem.variables();
  const auto obj = problem.objective();
  const auto old_precision = out.precision(17);

  out << "\\ " << vars.size() << " variables, " << problem.num_constraints() << " constraints, "
      << problem.num_binaries() << " binaries\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (obj[j] == 0.0) continue;
    out << ' ';
    write_term(out, obj[j], vars[j].name, first);
    first = false;
  }
  if (problem.objective_constant() != 0.0 || first) {
    out << (problem.objective_constant() < 0 ? " - " : " + ") << std::abs(problem.objective_constant());
  }
  out << "\nSubject To\n";
  for (const auto& c : problem.constraints()) {
    out << ' ' << c.name << ":";
    bool lead = true;
    for (const auto& t : c.terms) {
      out << ' ';
      write_term(out, t.coef, vars[t.var.index].name, lead);
      lead = false;
    }
    if (lead) out << " 0";
    switch (c.sense) {
      case Sense::LessEqual: out << " <= "; break;
      case Sense::GreaterEqual: out << " >= "; break;
      case Sense::Equal: out << " = "; break;
    }
    out << c.rhs << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : vars) {
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << v.lower << '\n';
    } else {
      out << ' ' << v.lower << " <= " << v.name << " <= " << v.upper << '\n';
    }
  }
  out << "Binaries\n";
  for (const auto& v : vars) {
    if (v.kind == VarKind::Binary) out << ' ' << v.name << '\n';
  }
  if (!problem.sos1_sets().empty()) {
    out << "SOS\n";
    std::size_t k = 0;
    for (const auto& set : problem.sos1_sets()) {
      out << " s" << k++ << ": S1::";
      for (std::size_t i = 0; i < set.members.size(); ++i) {
        out << ' ' << vars[set.members[i].index].name << ':' << set.weights[i];
      }
      out << '\n';
    }
  }
  out << "End\n";
  out.precision(old_precision);
}

}  // namespace mgrid::milp
