#pragma once

#include "mgrid/scenario.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mgrid::forecast {

// Observed loads for hours 0..last_known().
struct LoadHistory {
  std::vector<double> essential;
  std::vector<double> regular;

  [[nodiscard]] long last_known() const { return static_cast<long>(essential.size()) - 1; }
};

struct LoadEstimate {
  double essential = 0.0;
  double regular = 0.0;
};

// Mean of the two most recent observations per load class. Throws InputError
// with fewer than two observations.
[[nodiscard]] LoadEstimate predict_next(const LoadHistory& history);

[[nodiscard]] double rmse(std::span<const double> actual, std::span<const double> predicted);

struct WindowLoads {
  std::vector<double> essential;
  std::vector<double> regular;
  std::vector<bool> forecast;  // true where the value is a prediction
};

// Load values the controller believes for each window hour. Unavailable
// hours take the two-hour mean of the preceding believed values, so a run of
// missing hours is filled by feeding predictions back in.
[[nodiscard]] WindowLoads fill_window_loads(const scenario::ScenarioWindow& window);

struct RmseReport {
  std::size_t hours = 0;
  double essential = 0.0;
  double regular = 0.0;
  double total = 0.0;
};

// One-step-ahead forecast error over the comm-loss hours, where each hour is
// predicted from the two observed hours before it. Empty when the scenario
// has no comm-loss hours.
[[nodiscard]] std::optional<RmseReport> comm_loss_rmse(const scenario::ScenarioTimeSeries& series);

}  // namespace mgrid::forecast
