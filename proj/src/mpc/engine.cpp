#include "mgrid/error.hpp"
#include "mgrid/forecast.hpp"
#include "mgrid/mpc.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <string>

namespace mgrid::mpc {

using battery::Mode;

void EngineConfig::validate() const {
  weights.validate();
  params.validate();
  if (simulation_hours == 0) throw InputError("simulation_hours must be positive");
  if (horizon == 0) throw InputError("horizon must be positive");
  if (stride == Stride::Day && simulation_hours % horizon != 0) {
    throw InputError("day stride needs simulation_hours to be a multiple of the horizon");
  }
  (void)lifecycle_over_soc(curve);
}

MpcDecision commit_hour(const PlannedHour& planned, const MpcState& state, double generation,
                        double essential_load, double regular_load, const battery::BatteryParams& params) {
  MpcDecision d;
  d.hour = state.hour;
  d.mode = planned.mode;
  d.p_ch = planned.p_ch;
  d.p_dis = planned.p_dis;

  const double soc = battery::soc_update(state.soc, d.p_ch, d.p_dis, params);
  constexpr double kDrift = 1e-6;
  if (soc < params.soc_min - kDrift || soc > params.soc_max + kDrift) {
    throw SolverError("committed hour " + std::to_string(state.hour) + " drives SOC to " + std::to_string(soc));
  }
  d.soc_after = std::clamp(soc, params.soc_min, params.soc_max);

  d.generation = generation;
  d.essential_load = essential_load;
  d.regular_load = regular_load;
  const double deficit = essential_load + regular_load - (generation + d.p_dis - d.p_ch);
  if (deficit > 0.0) {
    d.regular_shed = std::min(regular_load, deficit);
    d.essential_shed = std::min(essential_load, deficit - d.regular_shed);
  } else {
    d.surplus = -deficit;
  }
  return d;
}

namespace {

HorizonPlan plan_window(const MpcState& state, const scenario::ScenarioWindow& window, const EngineConfig& config,
                        HorizonInputs* inputs_out) {
  auto inputs = planning_inputs(window);
  const auto hp = build_horizon_problem(inputs, state.soc, state.prev_mode, config.weights, config.params,
                                        config.curve, config.horizon_options);
  if (config.on_problem) config.on_problem(state.hour, hp.problem);
  auto plan = solve_horizon(hp, config.solver);
  if (inputs_out) *inputs_out = std::move(inputs);
  return plan;
}

long known_through(const EngineConfig& config, std::size_t hour) {
  return config.comm_loss ? static_cast<long>(hour) - 1 : LONG_MAX;
}

}  // namespace

MpcDecision step(const MpcState& state, const scenario::ScenarioWindow& window, const EngineConfig& config) {
  if (window.start != state.hour) throw InputError("window does not start at the decision hour");
  HorizonInputs inputs;
  const auto plan = plan_window(state, window, config, &inputs);
  const auto& s = *window.series;
  auto d = commit_hour(plan.hours.front(), state, window.generation(0), s.essential_load[state.hour],
                       s.regular_load[state.hour], config.params);
  d.horizon_objective = plan.full_objective;
  d.expected_ri = plan.expected_ri;
  d.forecast = inputs.forecast.front();
  return d;
}

metrics::SimulationResult run(const scenario::ScenarioTimeSeries& series, const EngineConfig& config) {
  config.validate();
  series.validate(config.simulation_hours, config.horizon);

  MpcState state{config.params.soc_init, Mode::Idle, 0};
  std::vector<MpcDecision> records;
  std::vector<metrics::RiPoint> curve;
  records.reserve(config.simulation_hours);

  if (config.stride == Stride::Hour) {
    for (std::size_t t = 0; t < config.simulation_hours; ++t) {
      state.hour = t;
      const auto win = scenario::window(series, t, config.horizon, known_through(config, t));
      const auto d = step(state, win, config);
      curve.push_back({t, d.expected_ri});
      state.soc = d.soc_after;
      state.prev_mode = d.mode;
      records.push_back(d);
    }
  } else {
    for (std::size_t t = 0; t < config.simulation_hours; t += config.horizon) {
      state.hour = t;
      const auto win = scenario::window(series, t, config.horizon, known_through(config, t));
      HorizonInputs inputs;
      const auto plan = plan_window(state, win, config, &inputs);
      curve.push_back({t, plan.expected_ri});
      for (std::size_t k = 0; k < config.horizon; ++k) {
        state.hour = t + k;
        auto d = commit_hour(plan.hours[k], state, series.generation(t + k), series.essential_load[t + k],
                             series.regular_load[t + k], config.params);
        d.horizon_objective = plan.full_objective;
        d.expected_ri = plan.expected_ri;
        d.forecast = inputs.forecast[k];
        state.soc = d.soc_after;
        state.prev_mode = d.mode;
        records.push_back(d);
      }
    }
  }

  return metrics::summarize(std::move(records), std::move(curve), config.params.soc_init, config.weights,
                            config.curve, forecast::comm_loss_rmse(series));
}

}  // namespace mgrid::mpc
