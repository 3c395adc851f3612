#include "mgrid/error.hpp"
#include "mgrid/forecast.hpp"
#include "mgrid/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mgrid::mpc {

using battery::Mode;
using milp::Sense;
using milp::VarId;

void Weights::validate_range() const {
  const double all[] = {w_bat, w_blc, w_t, w_r, w_essential, w_regular};
  for (double w : all) {
    if (!(w >= 0.0 && w <= 1.0)) throw InputError("weights must lie in [0,1]");
  }
}

void Weights::validate() const {
  validate_range();
  if (!(w_essential > w_regular)) {
    throw InputError("w_essential must be greater than w_regular (essential load has priority)");
  }
}

HorizonInputs planning_inputs(const scenario::ScenarioWindow& window) {
  auto loads = forecast::fill_window_loads(window);
  HorizonInputs in;
  in.generation.reserve(window.length);
  for (std::size_t k = 0; k < window.length; ++k) in.generation.push_back(window.generation(k));
  in.essential = std::move(loads.essential);
  in.regular = std::move(loads.regular);
  in.forecast = std::move(loads.forecast);
  return in;
}

milp::PiecewiseCurve lifecycle_over_soc(const battery::BlcCurve& curve) {
  const auto pts = curve.points();
  double peak = 0.0;
  for (const auto& p : pts) peak = std::max(peak, p.y);
  if (!(peak > 0.0)) throw InputError("lifecycle curve has no positive cycle count");
  std::vector<milp::Breakpoint> out;
  out.reserve(pts.size());
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) out.push_back({1.0 - it->x, it->y / peak});
  return milp::PiecewiseCurve(std::move(out));
}

namespace {

std::string tag(const char* base, std::size_t k) { return std::string(base) + "_" + std::to_string(k); }

}  // namespace

HorizonProblem build_horizon_problem(const HorizonInputs& in, double soc0, Mode prev_mode, const Weights& w,
                                     const battery::BatteryParams& bp, const battery::BlcCurve& curve,
                                     const HorizonOptions& options) {
  w.validate_range();
  bp.validate();
  const std::size_t n = in.size();
  if (n == 0) throw InputError("horizon has no hours");
  if (in.essential.size() != n || in.regular.size() != n) throw InputError("horizon input series differ in length");
  if (options.imbalance_segments == 0) throw InputError("imbalance penalty needs at least one segment");
  if (!(options.min_active_power >= 0.0 && options.min_active_power < 1.0)) {
    throw InputError("min_active_power must lie in [0,1)");
  }
  const double min_power = options.min_active_power * bp.p_max;
  constexpr double kSocSlack = 1e-9;
  if (!(soc0 >= bp.soc_min - kSocSlack && soc0 <= bp.soc_max + kSocSlack)) {
    throw InputError("initial SOC " + std::to_string(soc0) + " outside [soc_min, soc_max]");
  }
  soc0 = std::clamp(soc0, bp.soc_min, bp.soc_max);

  for (std::size_t k = 0; k < n; ++k) {
    if (!(in.generation[k] >= 0.0 && in.essential[k] >= 0.0 && in.regular[k] >= 0.0)) {
      throw InputError("horizon hour " + std::to_string(k) + " has a negative or non-finite power");
    }
  }

  HorizonProblem hp;
  hp.weights = w;
  auto& p = hp.problem;
  const auto life = lifecycle_over_soc(curve);

  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    scale = std::max({scale, in.essential[k] + in.regular[k], in.generation[k] + bp.p_max});
  }
  if (!(scale > 0.0)) scale = bp.p_max;
  hp.imbalance_scale = scale;
  const std::size_t segs = options.imbalance_segments;
  const double seg_width = scale / static_cast<double>(segs);

  const double charge_gain = bp.eta_ch / bp.e_max;
  const double discharge_loss = 1.0 / (bp.eta_dis * bp.e_max);

  hp.hours.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    HourVars h;
    h.p_ch = p.add_variable(0.0, bp.p_max, milp::VarKind::Continuous, tag("p_ch", k));
    h.p_dis = p.add_variable(0.0, bp.p_max, milp::VarKind::Continuous, tag("p_dis", k));
    h.charge = p.add_binary(tag("ch", k));
    h.discharge = p.add_binary(tag("dis", k));
    h.idle = p.add_binary(tag("idle", k));
    // Mode choices drive everything else; settle them before lifecycle segments.
    for (auto v : {h.charge, h.discharge, h.idle}) p.set_branch_priority(v, 1);
    h.soc = p.add_variable(bp.soc_min, bp.soc_max, milp::VarKind::Continuous, tag("soc", k));
    const double load = in.essential[k] + in.regular[k];
    h.shed_essential = p.add_variable(0.0, in.essential[k], milp::VarKind::Continuous, tag("shed_e", k));
    h.shed_regular = p.add_variable(0.0, in.regular[k], milp::VarKind::Continuous, tag("shed_r", k));
    for (std::size_t s = 0; s < segs; ++s) {
      h.surplus_segments.push_back(
          p.add_variable(0.0, seg_width, milp::VarKind::Continuous, tag("sur", k) + "_" + std::to_string(s)));
    }
    for (std::size_t s = 0; s < segs; ++s) {
      h.shed_segments.push_back(
          p.add_variable(0.0, seg_width, milp::VarKind::Continuous, tag("shd", k) + "_" + std::to_string(s)));
    }

    p.add_constraint({{h.charge, 1.0}, {h.discharge, 1.0}, {h.idle, 1.0}}, Sense::Equal, 1.0, tag("mode", k));
    p.add_constraint({{h.p_ch, 1.0}, {h.charge, -bp.p_max}}, Sense::LessEqual, 0.0, tag("ch_on", k));
    p.add_constraint({{h.p_dis, 1.0}, {h.discharge, -bp.p_max}}, Sense::LessEqual, 0.0, tag("dis_on", k));
    if (min_power > 0.0) {
      p.add_constraint({{h.p_ch, 1.0}, {h.charge, -min_power}}, Sense::GreaterEqual, 0.0, tag("ch_min", k));
      p.add_constraint({{h.p_dis, 1.0}, {h.discharge, -min_power}}, Sense::GreaterEqual, 0.0, tag("dis_min", k));
    }

    std::vector<milp::Term> chain{{h.soc, 1.0}, {h.p_ch, -charge_gain}, {h.p_dis, discharge_loss}};
    double chain_rhs = soc0;
    if (k > 0) {
      chain.push_back({hp.hours[k - 1].soc, -1.0});
      chain_rhs = 0.0;
    }
    p.add_constraint(std::move(chain), Sense::Equal, chain_rhs, tag("soc_chain", k));

    // Signed imbalance: supply + shed - surplus = load.
    std::vector<milp::Term> balance{
        {h.p_dis, 1.0}, {h.p_ch, -1.0}, {h.shed_essential, 1.0}, {h.shed_regular, 1.0}};
    for (auto v : h.surplus_segments) balance.push_back({v, -1.0});
    p.add_constraint(std::move(balance), Sense::Equal, load - in.generation[k], tag("balance", k));

    std::vector<milp::Term> shed_split{{h.shed_essential, 1.0}, {h.shed_regular, 1.0}};
    for (auto v : h.shed_segments) shed_split.push_back({v, -1.0});
    p.add_constraint(std::move(shed_split), Sense::Equal, 0.0, tag("shed_split", k));

    // With no weight the lifecycle term cannot move the argmin; leaving it out
    // spares the search eight free binaries per hour.
    if (w.w_blc > 0.0) h.lifecycle = milp::encode_piecewise(p, h.soc, life, options.lifecycle_form, tag("blc", k));

    // Objective.
    p.add_objective(h.idle, w.w_bat * bp.c_idle);
    if (k == 0) {
      const double cd = w.w_bat * bp.c_ch_dis;
      const double nc = w.w_bat * bp.c_no_ch_dis;
      switch (prev_mode) {
        case Mode::Charge:
          p.add_objective(h.discharge, cd);
          p.add_objective(h.idle, nc);
          break;
        case Mode::Discharge:
          p.add_objective(h.charge, cd);
          p.add_objective(h.idle, nc);
          break;
        case Mode::Idle:
          p.add_objective(h.charge, nc);
          p.add_objective(h.discharge, nc);
          break;
      }
    } else {
      // Mode-pair indicators pair[a][b] = mode a at k-1 and mode b at k, tied
      // to both hours' modes as a flow; integral whenever the modes are.
      const auto& prev = hp.hours[k - 1];
      const VarId from[3] = {prev.charge, prev.discharge, prev.idle};
      const VarId to[3] = {h.charge, h.discharge, h.idle};
      static constexpr const char* kNames[3] = {"c", "d", "i"};
      VarId pair[3][3];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          pair[i][j] = p.add_variable(0.0, 1.0, milp::VarKind::Continuous,
                                      tag("sw", k) + "_" + kNames[i] + kNames[j]);
          if (i == j) continue;
          const bool through_idle = i == 2 || j == 2;
          p.add_objective(pair[i][j], w.w_bat * (through_idle ? bp.c_no_ch_dis : bp.c_ch_dis));
        }
      }
      for (int i = 0; i < 3; ++i) {
        p.add_constraint({{pair[i][0], 1.0}, {pair[i][1], 1.0}, {pair[i][2], 1.0}, {from[i], -1.0}}, Sense::Equal,
                         0.0, tag("sw_out", k) + "_" + kNames[i]);
      }
      // The idle inflow row is implied by the other five.
      for (int j = 0; j < 2; ++j) {
        p.add_constraint({{pair[0][j], 1.0}, {pair[1][j], 1.0}, {pair[2][j], 1.0}, {to[j], -1.0}}, Sense::Equal, 0.0,
                         tag("sw_in", k) + "_" + kNames[j]);
      }
    }

    if (w.w_blc > 0.0) p.add_objective(h.lifecycle.y, -w.w_blc * bp.c_bat);

    for (std::size_t s = 0; s < segs; ++s) {
      // Chord slopes of (v / scale)^2 over equal-width pieces, so a full-scale
      // imbalance costs 1 like a fully shed hour does.
      const double slope = w.w_t * static_cast<double>(2 * s + 1) / (static_cast<double>(segs * segs) * seg_width);
      p.add_objective(h.surplus_segments[s], slope);
      p.add_objective(h.shed_segments[s], slope);
    }

    const double weighted = w.w_essential * in.essential[k] + w.w_regular * in.regular[k];
    hp.weighted_load.push_back(weighted);
    if (weighted > 0.0) {
      p.add_objective(h.shed_essential, w.w_r * w.w_essential / weighted);
      p.add_objective(h.shed_regular, w.w_r * w.w_regular / weighted);
    }
    hp.dropped_constant -= w.w_r;

    hp.hours.push_back(std::move(h));
  }
  return hp;
}

HorizonProblem build_horizon_problem(const scenario::ScenarioWindow& window, double soc0, Mode prev_mode,
                                     const Weights& weights, const battery::BatteryParams& params,
                                     const battery::BlcCurve& curve, const HorizonOptions& options) {
  return build_horizon_problem(planning_inputs(window), soc0, prev_mode, weights, params, curve, options);
}

HorizonPlan solve_horizon(const HorizonProblem& hp, const milp::SolverOptions& options) {
  const auto sol = milp::solve_milp(hp.problem, options);
  if (!sol.has_solution()) {
    std::string msg = std::string("horizon MILP returned ") + milp::to_string(sol.status);
    if (!sol.detail.empty()) msg += ": " + sol.detail;
    throw SolverError(msg);
  }
  auto clean = [](double v) { return std::abs(v) < 1e-9 ? 0.0 : v; };

  HorizonPlan plan;
  plan.status = sol.status;
  plan.objective = sol.objective;
  plan.full_objective = sol.objective + hp.dropped_constant;
  plan.gap = sol.gap;
  plan.nodes = sol.nodes;
  double ri_sum = 0.0;
  for (std::size_t k = 0; k < hp.hours.size(); ++k) {
    const auto& h = hp.hours[k];
    PlannedHour ph;
    const double ch = sol.value(h.charge);
    const double dis = sol.value(h.discharge);
    const double idle = sol.value(h.idle);
    if (ch >= dis && ch >= idle) {
      ph.mode = Mode::Charge;
    } else if (dis >= idle) {
      ph.mode = Mode::Discharge;
    } else {
      ph.mode = Mode::Idle;
    }
    ph.p_ch = ph.mode == Mode::Charge ? std::max(0.0, clean(sol.value(h.p_ch))) : 0.0;
    ph.p_dis = ph.mode == Mode::Discharge ? std::max(0.0, clean(sol.value(h.p_dis))) : 0.0;
    ph.soc = sol.value(h.soc);
    ph.shed_essential = std::max(0.0, clean(sol.value(h.shed_essential)));
    ph.shed_regular = std::max(0.0, clean(sol.value(h.shed_regular)));
    double surplus = 0.0;
    for (auto v : h.surplus_segments) surplus += sol.value(v);
    ph.surplus = std::max(0.0, clean(surplus));
    const double wl = hp.weighted_load[k];
    if (wl > 0.0) {
      const double lost = hp.weights.w_essential * ph.shed_essential + hp.weights.w_regular * ph.shed_regular;
      ph.resilience = std::clamp(1.0 - lost / wl, 0.0, 1.0);
    }
    ri_sum += ph.resilience;
    plan.hours.push_back(ph);
  }
  plan.expected_ri = ri_sum / static_cast<double>(plan.hours.size());
  return plan;
}

}  // namespace mgrid::mpc
