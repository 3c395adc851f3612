#include "dense_simplex.hpp"
#include "mgrid/error.hpp"
#include "mgrid/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <thread>
#include <utility>
#include <vector>

namespace mgrid::milp {

namespace {

using detail::DenseSimplex;
using detail::LpStatus;

constexpr double kInf = std::numeric_limits<double>::infinity();
// Integral node solutions whose rows are off by more than this get their LP
// re-solved from scratch before being accepted.
constexpr double kAcceptViolation = 1e-6;

struct Fix {
  std::uint32_t var;
  std::uint8_t value;
};

struct FixLess {
  bool operator()(const std::vector<Fix>& a, const std::vector<Fix>& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](const Fix& x, const Fix& y) {
      return x.var != y.var ? x.var < y.var : x.value < y.value;
    });
  }
};

struct Node {
  double bound;
  std::uint64_t seq;
  std::vector<Fix> fixes;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

MilpSolution from_lp_status(LpStatus st, const DenseSimplex& lp) {
  MilpSolution sol;
  sol.lp_iterations = lp.iterations();
  switch (st) {
    case LpStatus::Optimal:
      sol.status = SolveStatus::Optimal;
      sol.values = lp.values();
      sol.objective = lp.objective();
      break;
    case LpStatus::Infeasible: sol.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded:
      sol.status = SolveStatus::Unbounded;
      sol.detail = lp.detail();
      break;
    case LpStatus::Stalled:
      sol.status = SolveStatus::NumericalError;
      sol.detail = lp.detail();
      break;
  }
  return sol;
}

// Re-imposes the original binary bounds, then the node's fixings.
void apply_node(DenseSimplex& lp, const MilpProblem& problem, const std::vector<std::size_t>& binaries,
                const std::vector<Fix>& fixes) {
  std::vector<std::int8_t> wanted(problem.num_variables(), -1);
  for (const auto& f : fixes) wanted[f.var] = static_cast<std::int8_t>(f.value);
  for (std::size_t j : binaries) {
    const auto& v = problem.variables()[j];
    double lo = v.lower;
    double hi = v.upper;
    if (wanted[j] >= 0) lo = hi = wanted[j];
    if (lo != lp.lower(j) || hi != lp.upper(j)) lp.set_bounds(j, lo, hi);
  }
}

struct NodeResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = kInf;
  std::vector<double> values;
};

NodeResult solve_node(DenseSimplex& lp, const MilpProblem& problem, const std::vector<std::size_t>& binaries,
                      const std::vector<Fix>& fixes, double feas_tol) {
  apply_node(lp, problem, binaries, fixes);
  auto st = lp.reoptimize();
  if (st == LpStatus::Optimal && problem.max_violation(lp.values()) > std::max(kAcceptViolation, 10 * feas_tol)) {
    st = lp.solve();
  }
  NodeResult res;
  res.status = st;
  if (st == LpStatus::Optimal) {
    res.objective = lp.objective();
    res.values = lp.values();
  }
  return res;
}

// A branching choice: one binary, or a set split after position `split`.
struct Branch {
  int level = std::numeric_limits<int>::min();
  double score = 0.0;
  std::size_t key = 0;
  std::size_t var = 0;
  const Sos1* set = nullptr;
  std::size_t split = 0;
  double left_mass = 0.0;
  bool found = false;

  [[nodiscard]] bool beats(const Branch& o) const {
    if (!o.found) return true;
    if (level != o.level) return level > o.level;
    if (score != o.score) return score > o.score;
    return key < o.key;
  }
};

Branch choose_branch(const MilpProblem& problem, const std::vector<std::size_t>& binaries,
                     const std::vector<const Sos1*>& owner, const std::vector<double>& x, double tol) {
  Branch best;
  std::vector<bool> set_spread(problem.sos1_sets().size(), false);
  for (std::size_t s = 0; s < problem.sos1_sets().size(); ++s) {
    const auto& set = problem.sos1_sets()[s];
    std::size_t first = set.members.size();
    std::size_t last = 0;
    double mass = 0.0;
    double pos = 0.0;
    int level = std::numeric_limits<int>::min();
    for (std::size_t i = 0; i < set.members.size(); ++i) {
      const std::size_t j = set.members[i].index;
      level = std::max(level, problem.variables()[j].branch_priority);
      const double v = x[j];
      if (v <= tol) continue;
      first = std::min(first, i);
      last = i;
      mass += v;
      pos += v * set.weights[i];
    }
    if (first >= last) continue;
    set_spread[s] = true;
    pos /= mass;
    std::size_t t = first;
    while (t + 1 < last && set.weights[t + 1] <= pos) ++t;
    double left = 0.0;
    for (std::size_t i = first; i <= t; ++i) left += std::max(0.0, x[set.members[i].index]);
    Branch cand;
    cand.level = level;
    cand.score = std::min(left, mass - left) / mass;
    cand.key = set.members.front().index;
    cand.set = &set;
    cand.split = t;
    cand.left_mass = left / mass;
    cand.found = true;
    if (cand.beats(best)) best = cand;
  }
  for (std::size_t j : binaries) {
    if (owner[j] != nullptr && set_spread[static_cast<std::size_t>(owner[j] - problem.sos1_sets().data())]) continue;
    const double v = x[j];
    const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
    if (frac <= tol) continue;
    Branch cand;
    cand.level = problem.variables()[j].branch_priority;
    cand.score = frac;
    cand.key = j;
    cand.var = j;
    cand.found = true;
    if (cand.beats(best)) best = cand;
  }
  return best;
}

// Snaps every branching set to the member nearest its weighted LP position.
// Returns the fixings, or nothing when a binary outside the sets is still
// fractional.
std::optional<std::vector<Fix>> round_sets(const MilpProblem& problem, const std::vector<std::size_t>& binaries,
                                           const std::vector<const Sos1*>& owner, const std::vector<double>& x,
                                           double tol) {
  std::vector<Fix> fixes;
  for (std::size_t j : binaries) {
    if (owner[j] != nullptr) continue;
    const double r = std::round(x[j]);
    if (std::abs(x[j] - r) > tol) return std::nullopt;
    fixes.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint8_t>(r)});
  }
  for (const auto& set : problem.sos1_sets()) {
    double mass = 0.0;
    double pos = 0.0;
    for (std::size_t i = 0; i < set.members.size(); ++i) {
      const double v = std::max(0.0, x[set.members[i].index]);
      mass += v;
      pos += v * set.weights[i];
    }
    std::size_t pick = 0;
    if (mass > 0.0) {
      pos /= mass;
      for (std::size_t i = 1; i < set.members.size(); ++i) {
        if (std::abs(set.weights[i] - pos) < std::abs(set.weights[pick] - pos)) pick = i;
      }
    }
    for (std::size_t i = 0; i < set.members.size(); ++i) {
      fixes.push_back({static_cast<std::uint32_t>(set.members[i].index), static_cast<std::uint8_t>(i == pick)});
    }
  }
  return fixes;
}

}  // namespace

MilpSolution solve_lp(const MilpProblem& problem, const SolverOptions& options) {
  problem.validate();
  DenseSimplex lp(problem, options.feasibility_tol);
  const auto st = lp.solve();
  return from_lp_status(st, lp);
}

MilpSolution solve_milp(const MilpProblem& problem, const SolverOptions& options) {
  problem.validate();
  if (!(options.feasibility_tol > 0.0 && options.integrality_tol > 0.0 && options.relative_gap >= 0.0)) {
    throw InputError("solver tolerances must be positive");
  }

  std::vector<std::size_t> binaries;
  for (std::size_t j = 0; j < problem.num_variables(); ++j) {
    if (problem.variables()[j].kind == VarKind::Binary) binaries.push_back(j);
  }

  std::vector<const Sos1*> owner(problem.num_variables(), nullptr);
  std::size_t set_members = 0;
  for (const auto& set : problem.sos1_sets()) {
    for (auto m : set.members) owner[m.index] = &set;
    set_members += set.members.size();
  }

  const unsigned workers = std::max(1u, options.threads);
  std::vector<DenseSimplex> lps;
  lps.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) lps.emplace_back(problem, options.feasibility_tol);

  MilpSolution result;
  const auto root_status = lps[0].solve();
  if (root_status != LpStatus::Optimal) {
    result = from_lp_status(root_status, lps[0]);
    result.values.clear();
    result.nodes = 1;
    return result;
  }
  const double root_bound = lps[0].objective();

  double incumbent = kInf;
  std::vector<double> incumbent_values;
  auto tolerance = [&] { return std::max(1e-9, options.relative_gap * std::max(1.0, std::abs(incumbent))); };
  auto prunable = [&](double bound) { return incumbent < kInf && bound >= incumbent - tolerance(); };

  // Best-first queue, plus a stack taken ahead of it. Until the first
  // incumbent the search is depth-first through the stack; afterwards the
  // stack holds at most the preferred child of the last node (a plunge), so
  // consecutive node LPs stay one bound change apart.
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::vector<Node> dive;
  std::uint64_t seq = 0;
  dive.push_back({root_bound, seq++, {}});
  std::size_t nodes = 0;
  bool hit_limit = false;

  // Outside-set assignments already tried by the rounding heuristic.
  std::set<std::vector<Fix>, FixLess> rounded;
  auto accept = [&](double objective, std::vector<double> values) {
    if (incumbent == kInf) {
      for (auto& node : dive) open.push(std::move(node));
      dive.clear();
    }
    incumbent = objective;
    incumbent_values = std::move(values);
  };

  std::vector<Node> batch;
  std::vector<NodeResult> results;
  while (!open.empty() || !dive.empty()) {
    if (nodes >= options.node_limit) {
      hit_limit = true;
      break;
    }
    batch.clear();
    while (batch.size() < workers && nodes + batch.size() < options.node_limit) {
      Node node;
      if (!dive.empty()) {
        node = std::move(dive.back());
        dive.pop_back();
      } else if (!open.empty()) {
        node = open.top();
        open.pop();
      } else {
        break;
      }
      if (prunable(node.bound)) continue;
      batch.push_back(std::move(node));
    }
    if (batch.empty()) continue;
    nodes += batch.size();

    results.assign(batch.size(), {});
    if (batch.size() == 1) {
      results[0] = solve_node(lps[0], problem, binaries, batch[0].fixes, options.feasibility_tol);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) {
        threads.emplace_back([&, k] {
          results[k] = solve_node(lps[k], problem, binaries, batch[k].fixes, options.feasibility_tol);
        });
      }
      for (auto& t : threads) t.join();
    }

    // Results are consumed in pop order so the search is reproducible for a
    // fixed worker count.
    for (std::size_t k = 0; k < batch.size(); ++k) {
      auto& res = results[k];
      if (res.status == LpStatus::Infeasible) continue;
      if (res.status != LpStatus::Optimal) {
        result.status = SolveStatus::NumericalError;
        result.detail = lps[std::min(k, lps.size() - 1)].detail();
        result.nodes = nodes;
        return result;
      }
      if (prunable(res.objective)) continue;

      const Branch br = choose_branch(problem, binaries, owner, res.values, options.integrality_tol);
      if (!br.found) {
        accept(res.objective, std::move(res.values));
        continue;
      }
      if (br.set != nullptr) {
        if (auto fixes = round_sets(problem, binaries, owner, res.values, options.integrality_tol)) {
          std::vector<Fix> outside(fixes->begin(), fixes->end() - static_cast<std::ptrdiff_t>(set_members));
          if (rounded.insert(std::move(outside)).second) {
            auto heur = solve_node(lps[0], problem, binaries, *fixes, options.feasibility_tol);
            if (heur.status == LpStatus::Optimal && heur.objective < incumbent - tolerance()) {
              accept(heur.objective, std::move(heur.values));
            }
            if (prunable(res.objective)) continue;
          }
        }
      }
      // `down` keeps the left part of a set (or sets the binary to 0), `upf`
      // keeps the right part (or sets it to 1).
      auto down = batch[k].fixes;
      auto upf = std::move(batch[k].fixes);
      bool lean_up = false;
      if (br.set != nullptr) {
        for (std::size_t i = 0; i < br.set->members.size(); ++i) {
          const auto var = static_cast<std::uint32_t>(br.set->members[i].index);
          (i > br.split ? down : upf).push_back({var, 0});
        }
        lean_up = br.left_mass < 0.5;
      } else {
        const auto var = static_cast<std::uint32_t>(br.var);
        down.push_back({var, 0});
        upf.push_back({var, 1});
        lean_up = res.values[br.var] >= 0.5;
      }
      // Both children share this node's bound; FIFO order puts the side the
      // LP value leans toward first.
      Node first{res.objective, seq++, lean_up ? std::move(upf) : std::move(down)};
      Node second{res.objective, seq++, lean_up ? std::move(down) : std::move(upf)};
      if (incumbent == kInf) {
        dive.push_back(std::move(second));
        dive.push_back(std::move(first));
      } else {
        if (dive.empty()) {
          dive.push_back(std::move(first));
        } else {
          open.push(std::move(first));
        }
        open.push(std::move(second));
      }
    }
  }
  for (auto& node : dive) open.push(std::move(node));
  dive.clear();

  result.nodes = nodes;
  for (const auto& lp : lps) result.lp_iterations += lp.iterations();
  if (incumbent_values.empty()) {
    result.status = hit_limit ? SolveStatus::GapLimit : SolveStatus::Infeasible;
    result.gap = hit_limit ? kInf : 0.0;
    return result;
  }

  // Polish: pin the binaries to their rounded values and re-solve the LP from
  // a fresh tableau so the reported continuous values carry no pivot drift.
  DenseSimplex& polish = lps[0];
  for (std::size_t j : binaries) {
    const double r = std::round(incumbent_values[j]);
    polish.set_bounds(j, r, r);
  }
  if (polish.solve() == LpStatus::Optimal && polish.objective() <= incumbent + tolerance()) {
    incumbent_values = polish.values();
    incumbent = polish.objective();
  } else {
    for (std::size_t j : binaries) incumbent_values[j] = std::round(incumbent_values[j]);
  }

  double best_open = incumbent;
  if (!open.empty()) best_open = std::min(best_open, open.top().bound);
  result.values = std::move(incumbent_values);
  result.objective = problem.evaluate(result.values);
  result.gap = std::max(0.0, (result.objective - best_open) / std::max(1.0, std::abs(result.objective)));
  result.status = hit_limit && result.gap > options.relative_gap ? SolveStatus::GapLimit : SolveStatus::Optimal;
  return result;
}

}  // namespace mgrid::milp
