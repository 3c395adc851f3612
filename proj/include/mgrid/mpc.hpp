#pragma once

#include "mgrid/battery.hpp"
#include "mgrid/decision.hpp"
#include "mgrid/metrics.hpp"
#include "mgrid/milp.hpp"
#include "mgrid/scenario.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace mgrid::mpc {

enum class Stride {
  Hour,  // re-plan every hour, commit the first hour
  Day,   // re-plan every horizon, commit the whole plan
};

struct HorizonOptions {
  // Linear pieces per side of the imbalance penalty.
  std::size_t imbalance_segments = 4;
  milp::PiecewiseForm lifecycle_form = milp::PiecewiseForm::ConvexCombination;
  // Smallest power, as a fraction of p_max, a charging or discharging hour
  // must move. Without it a zero-power CH hour would stand in for IDLE
  // and dodge the idle holding cost.
  double min_active_power = 0.01;
};

[[nodiscard]] inline milp::SolverOptions default_solver() {
  milp::SolverOptions o;
  o.relative_gap = 1e-3;
  o.node_limit = 500;
  return o;
}

struct EngineConfig {
  Weights weights;
  battery::BatteryParams params;
  battery::BlcCurve curve = battery::default_blc_curve();
  std::size_t simulation_hours = scenario::kSimulationHours;
  std::size_t horizon = scenario::kLookahead;
  Stride stride = Stride::Hour;
  // When false the controller sees real loads even in comm-loss hours.
  bool comm_loss = true;
  HorizonOptions horizon_options;
  // Node-limited so a full run stays interactive; the limit, not a clock,
  // ends the search, so runs stay reproducible.
  milp::SolverOptions solver = default_solver();
  // Called with each decision hour's problem before it is solved.
  std::function<void(std::size_t hour, const milp::MilpProblem&)> on_problem;

  void validate() const;
};

// Generation and the loads the controller believes, one entry per hour.
struct HorizonInputs {
  std::vector<double> generation;
  std::vector<double> essential;
  std::vector<double> regular;
  std::vector<bool> forecast;

  [[nodiscard]] std::size_t size() const { return generation.size(); }
};

// Real loads where available, two-hour-mean forecasts elsewhere.
[[nodiscard]] HorizonInputs planning_inputs(const scenario::ScenarioWindow& window);

struct HourVars {
  milp::VarId p_ch, p_dis;
  milp::VarId charge, discharge, idle;
  milp::VarId soc;
  milp::VarId shed_essential, shed_regular;
  std::vector<milp::VarId> surplus_segments;
  std::vector<milp::VarId> shed_segments;
  milp::PiecewiseEncoding lifecycle;
};

struct HorizonProblem {
  milp::MilpProblem problem;
  std::vector<HourVars> hours;
  Weights weights;
  std::vector<double> weighted_load;
  // Width of the imbalance penalty's domain, per side.
  double imbalance_scale = 0.0;
  // Sum of the resilience constants left out of the objective; add it to the
  // MILP objective to get the full cost.
  double dropped_constant = 0.0;
};

// Lifecycle curve re-expressed over SOC and normalized to a peak of 1.
[[nodiscard]] milp::PiecewiseCurve lifecycle_over_soc(const battery::BlcCurve& curve);

[[nodiscard]] HorizonProblem build_horizon_problem(const HorizonInputs& inputs, double soc0,
                                                   battery::Mode prev_mode, const Weights& weights,
                                                   const battery::BatteryParams& params,
                                                   const battery::BlcCurve& curve,
                                                   const HorizonOptions& options = {});

[[nodiscard]] HorizonProblem build_horizon_problem(const scenario::ScenarioWindow& window, double soc0,
                                                   battery::Mode prev_mode, const Weights& weights,
                                                   const battery::BatteryParams& params,
                                                   const battery::BlcCurve& curve,
                                                   const HorizonOptions& options = {});

struct PlannedHour {
  battery::Mode mode = battery::Mode::Idle;
  double p_ch = 0.0;
  double p_dis = 0.0;
  double soc = 0.0;
  double shed_essential = 0.0;
  double shed_regular = 0.0;
  double surplus = 0.0;
  double resilience = 1.0;
};

struct HorizonPlan {
  milp::SolveStatus status = milp::SolveStatus::Infeasible;
  std::vector<PlannedHour> hours;
  double objective = 0.0;       // as optimized, resilience constants excluded
  double full_objective = 0.0;  // objective + dropped_constant
  double expected_ri = 0.0;     // mean planned resilience over the horizon
  double gap = 0.0;
  std::size_t nodes = 0;
};

// Throws SolverError if the MILP has no solution.
[[nodiscard]] HorizonPlan solve_horizon(const HorizonProblem& horizon, const milp::SolverOptions& options = {});

struct MpcState {
  double soc = 0.5;
  battery::Mode prev_mode = battery::Mode::Idle;
  std::size_t hour = 0;
};

// Applies a planned hour to reality: battery powers as planned, shed and
// surplus from the real loads with regular load shed before essential.
[[nodiscard]] MpcDecision commit_hour(const PlannedHour& planned, const MpcState& state, double generation,
                                      double essential_load, double regular_load,
                                      const battery::BatteryParams& params);

// Plans over `window` from `state` and commits the first hour.
[[nodiscard]] MpcDecision step(const MpcState& state, const scenario::ScenarioWindow& window,
                               const EngineConfig& config);

// Receding-horizon simulation over config.simulation_hours.
[[nodiscard]] metrics::SimulationResult run(const scenario::ScenarioTimeSeries& series, const EngineConfig& config);

}  // namespace mgrid::mpc
