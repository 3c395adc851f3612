#pragma once

#include "mgrid/milp.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mgrid::battery {

enum class Mode { Charge, Discharge, Idle };

// "CH", "DIS", "IDLE".
[[nodiscard]] const char* to_string(Mode mode);
[[nodiscard]] Mode parse_mode(std::string_view text);

// Physical and economic constants. Fractions are of e_max; powers in kW;
// energy in kWh. The time step is one hour.
struct BatteryParams {
  double eta_ch = 0.90;
  double eta_dis = 0.95;
  double soc_init = 0.5;
  double soc_min = 0.2;
  double soc_max = 0.9;
  double e_max = 4.0;
  double p_max = 4.0;
  double c_bat = 125.0;
  double c_ch_dis = 0.055;
  double c_no_ch_dis = 0.055;
  double c_idle = 0.0275;

  void validate() const;
};

// Depth of discharge (fraction) -> achievable cycle count.
using BlcCurve = milp::PiecewiseCurve;

inline constexpr std::size_t kBlcBreakpoints = 9;

// Representative lithium-ion shape; replace with a manufacturer curve via
// load_blc_curve for real studies.
[[nodiscard]] BlcCurve default_blc_curve();

// Checks the lifecycle-curve invariants: nine breakpoints, depth strictly
// increasing inside (0,1], cycles positive and strictly decreasing.
[[nodiscard]] BlcCurve make_blc_curve(std::vector<milp::Breakpoint> points);

// CSV with header `dod,cycles` and nine data rows.
[[nodiscard]] BlcCurve load_blc_curve(const std::filesystem::path& path);
[[nodiscard]] BlcCurve read_blc_curve(std::istream& in);
void write_blc_curve(std::ostream& out, const BlcCurve& curve);

// State of charge after one hour at the given powers (at most one nonzero).
[[nodiscard]] double soc_update(double soc, double p_ch, double p_dis, const BatteryParams& params);

[[nodiscard]] double blc_eval(const BlcCurve& curve, double dod);

[[nodiscard]] inline double dod_of(double soc) { return 1.0 - soc; }

// Cost of moving from `prev` to `next` for one hour, including the idle
// holding cost when `next` is Idle.
[[nodiscard]] double switching_cost(Mode prev, Mode next, const BatteryParams& params);

struct HourState {
  Mode mode = Mode::Idle;
  double soc_after = 0.0;
};

struct LifespanEstimate {
  // False when the run never discharged; `years` is meaningless then.
  bool cycling = false;
  double years = 0.0;
  std::size_t episodes = 0;
  double mean_depth = 0.0;
  double days = 0.0;
};

// Each maximal run of discharge hours is one cycle whose depth is the SOC
// drop across the run. Lifespan is the curve's cycle count at the mean depth
// divided by the yearly episode rate. Mean depths shallower than the curve's
// first breakpoint are evaluated at that breakpoint.
[[nodiscard]] LifespanEstimate estimate_lifespan(double soc_start, std::span<const HourState> hours,
                                                 const BlcCurve& curve);

}  // namespace mgrid::battery
