#pragma once

#include "mgrid/battery.hpp"
#include "mgrid/decision.hpp"
#include "mgrid/forecast.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mgrid::metrics {

struct RiPoint {
  std::size_t hour = 0;
  double expected_ri = 0.0;

  friend bool operator==(const RiPoint&, const RiPoint&) = default;
};

struct LossTotals {
  double essential = 0.0;  // kWh
  double regular = 0.0;
  double total = 0.0;
};

struct SimulationResult {
  std::vector<mpc::MpcDecision> records;
  std::vector<RiPoint> ri_curve;
  double soc_start = 0.0;

  std::size_t switches = 0;
  std::size_t discharge_episodes = 0;
  LossTotals losses;
  double resilience_index = 1.0;
  battery::LifespanEstimate lifespan;
  std::optional<forecast::RmseReport> rmse;
};

// Adjacent hours with different modes.
[[nodiscard]] std::size_t count_switches(std::span<const battery::Mode> modes);

// Maximal runs of consecutive discharge hours.
[[nodiscard]] std::size_t discharge_episodes(std::span<const battery::Mode> modes);

// 1 - weighted shed / weighted load, both summed over the records. Throws
// InputError when the weighted load is zero.
[[nodiscard]] double resilience_index(std::span<const mpc::MpcDecision> records, const mpc::Weights& weights);

[[nodiscard]] LossTotals loss_totals(std::span<const mpc::MpcDecision> records);

[[nodiscard]] SimulationResult summarize(std::vector<mpc::MpcDecision> records, std::vector<RiPoint> ri_curve,
                                         double soc_start, const mpc::Weights& weights,
                                         const battery::BlcCurve& curve,
                                         std::optional<forecast::RmseReport> rmse);

// trace.csv: hour,mode,p_ch,p_dis,soc,essential_shed,regular_shed,surplus,expected_ri
void write_trace(std::ostream& out, std::span<const mpc::MpcDecision> records);
// Restores the columns present in trace.csv; other fields stay default.
[[nodiscard]] std::vector<mpc::MpcDecision> read_trace(std::istream& in);

// ri_curve.csv: hour,expected_ri
void write_ri_curve(std::ostream& out, std::span<const RiPoint> curve);
[[nodiscard]] std::vector<RiPoint> read_ri_curve(std::istream& in);

// Pretty-printed JSON object with the run's aggregate metrics.
[[nodiscard]] std::string summary_json(const SimulationResult& result);

// Writes trace.csv, ri_curve.csv and summary.json into `dir`, creating it.
void write_outputs(const std::filesystem::path& dir, const SimulationResult& result);

}  // namespace mgrid::metrics
