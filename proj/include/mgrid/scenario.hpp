#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace mgrid::scenario {

inline constexpr std::size_t kSimulationHours = 72;
inline constexpr std::size_t kLookahead = 24;
inline constexpr std::size_t kMinimumHours = kSimulationHours + kLookahead;

// Hourly inputs for one study. Powers in kW, one entry per hour. Treat as
// immutable once validated; windows keep views into it.
struct ScenarioTimeSeries {
  std::vector<double> wind;
  std::vector<double> solar;
  std::vector<double> essential_load;
  std::vector<double> regular_load;
  std::vector<bool> hilp;
  std::vector<bool> comm_loss;

  [[nodiscard]] std::size_t hours() const { return wind.size(); }
  [[nodiscard]] double generation(std::size_t h) const { return wind[h] + solar[h]; }
  [[nodiscard]] double total_load(std::size_t h) const { return essential_load[h] + regular_load[h]; }
  [[nodiscard]] std::vector<std::size_t> hilp_hours() const;
  [[nodiscard]] std::vector<std::size_t> comm_loss_hours() const;

  // Throws InputError unless all series have equal length of at least
  // simulation_hours + lookahead, every power is finite and non-negative,
  // and comm-loss hours fall inside the simulated range.
  void validate(std::size_t simulation_hours = kSimulationHours, std::size_t lookahead = kLookahead) const;

  friend bool operator==(const ScenarioTimeSeries&, const ScenarioTimeSeries&) = default;
};

// CSV: `hour,wind_kw,solar_kw,essential_kw,regular_kw,hilp,comm_loss`, hour
// contiguous from 0, flags 0/1.
[[nodiscard]] ScenarioTimeSeries read_scenario(std::istream& in, std::size_t simulation_hours = kSimulationHours,
                                               std::size_t lookahead = kLookahead);
[[nodiscard]] ScenarioTimeSeries load_scenario(const std::filesystem::path& path,
                                               std::size_t simulation_hours = kSimulationHours,
                                               std::size_t lookahead = kLookahead);
void write_scenario(std::ostream& out, const ScenarioTimeSeries& series);
void save_scenario(const std::filesystem::path& path, const ScenarioTimeSeries& series);

// A read-only slice [start, start + length) of a series. `available[k]` is
// false when hour start+k lies in the comm-loss set and has not yet been
// observed (hour > known_through); its load fields must then be forecast.
struct ScenarioWindow {
  const ScenarioTimeSeries* series = nullptr;
  std::size_t start = 0;
  std::size_t length = 0;
  long known_through = -1;
  std::span<const double> wind;
  std::span<const double> solar;
  std::span<const double> essential_load;
  std::span<const double> regular_load;
  std::vector<bool> available;

  [[nodiscard]] double generation(std::size_t k) const { return wind[k] + solar[k]; }
};

[[nodiscard]] ScenarioWindow window(const ScenarioTimeSeries& series, std::size_t start, std::size_t length,
                                    long known_through);

struct GeneratorSettings {
  std::size_t hours = kMinimumHours;
  // Inclusive event window.
  std::size_t hilp_start = 27;
  std::size_t hilp_end = 39;
  bool comm_loss = true;
  std::size_t comm_loss_start = 27;
  std::size_t comm_loss_end = 39;

  double essential_mean_kw = 1.0;
  double regular_mean_kw = 1.5;
  // Share of generated energy coming from wind; the rest is solar. Both are
  // scaled so mean generation matches mean load over the whole series.
  double wind_share = 0.55;
  double hilp_solar_factor = 0.35;
  // Wind multiplier reached in the hour before the event / after it.
  double pre_event_wind_factor = 2.2;
  double post_event_wind_factor = 1.8;
  std::size_t wind_ramp_hours = 6;
};

// Deterministic for a given seed and settings.
[[nodiscard]] ScenarioTimeSeries generate_synthetic(std::uint64_t seed, const GeneratorSettings& settings = {});

}  // namespace mgrid::scenario
