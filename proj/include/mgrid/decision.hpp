#pragma once

#include "mgrid/battery.hpp"

#include <cstddef>

namespace mgrid::mpc {

// Objective weights. The four term weights scale switching cost, lifecycle
// credit, imbalance penalty and resilience credit; the two load weights set
// the priority of essential over regular load inside the resilience term.
struct Weights {
  double w_bat = 1.0;
  double w_blc = 1e-5;
  double w_t = 1.0;
  double w_r = 1.0;
  double w_essential = 0.9;
  double w_regular = 0.1;

  // Throws InputError unless every weight is in [0,1].
  void validate_range() const;
  // validate_range, plus w_essential > w_regular.
  void validate() const;
};

// One committed hour. Shed and surplus are what actually happened with the
// committed battery powers and the real loads of that hour.
struct MpcDecision {
  std::size_t hour = 0;
  battery::Mode mode = battery::Mode::Idle;
  double p_ch = 0.0;
  double p_dis = 0.0;
  double soc_after = 0.0;
  double essential_shed = 0.0;
  double regular_shed = 0.0;
  double surplus = 0.0;
  double horizon_objective = 0.0;
  double expected_ri = 0.0;

  double generation = 0.0;
  double essential_load = 0.0;
  double regular_load = 0.0;
  // Loads for this hour were forecast when the plan was made.
  bool forecast = false;

  friend bool operator==(const MpcDecision&, const MpcDecision&) = default;
};

}  // namespace mgrid::mpc
