#include "mgrid/scenario.hpp"

#include "csv_util.hpp"
#include "mgrid/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace mgrid::scenario {

namespace {

constexpr std::string_view kHeader = "hour,wind_kw,solar_kw,essential_kw,regular_kw,hilp,comm_loss";
constexpr std::string_view kColumns[] = {"hour", "wind_kw", "solar_kw", "essential_kw", "regular_kw", "hilp",
                                         "comm_loss"};

std::vector<std::size_t> flagged(const std::vector<bool>& flags) {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < flags.size(); ++h) {
    if (flags[h]) out.push_back(h);
  }
  return out;
}

bool parse_flag(std::string_view text, std::size_t row, std::string_view column) {
  const auto v = csv::parse_int(text, row, column);
  if (v != 0 && v != 1) throw InputError(csv::where(row, column) + ": flag must be 0 or 1");
  return v == 1;
}

}  // namespace

std::vector<std::size_t> ScenarioTimeSeries::hilp_hours() const { return flagged(hilp); }
std::vector<std::size_t> ScenarioTimeSeries::comm_loss_hours() const { return flagged(comm_loss); }

void ScenarioTimeSeries::validate(std::size_t simulation_hours, std::size_t lookahead) const {
  const std::size_t n = wind.size();
  if (solar.size() != n || essential_load.size() != n || regular_load.size() != n || hilp.size() != n ||
      comm_loss.size() != n) {
    throw InputError("scenario series have unequal lengths");
  }
  const std::size_t required = simulation_hours + lookahead;
  if (n < required) {
    throw InputError("scenario has " + std::to_string(n) + " hours; " + std::to_string(required) +
                     " required (" + std::to_string(simulation_hours) + " simulated + " +
                     std::to_string(lookahead) + " lookahead)");
  }
  const std::pair<const std::vector<double>*, std::string_view> series[] = {
      {&wind, kColumns[1]}, {&solar, kColumns[2]}, {&essential_load, kColumns[3]}, {&regular_load, kColumns[4]}};
  for (const auto& [values, column] : series) {
    for (std::size_t h = 0; h < n; ++h) {
      const double v = (*values)[h];
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError("hour " + std::to_string(h) + ", column '" + std::string(column) +
                         "': power must be finite and non-negative, got " + csv::format_double(v));
      }
    }
  }
  for (std::size_t h = simulation_hours; h < n; ++h) {
    if (comm_loss[h]) {
      throw InputError("comm-loss hour " + std::to_string(h) + " lies outside the simulated range [0, " +
                       std::to_string(simulation_hours) + ")");
    }
  }
}

ScenarioTimeSeries read_scenario(std::istream& in, std::size_t simulation_hours, std::size_t lookahead) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("scenario file is empty");
  if (csv::trim_cr(line) != kHeader) throw InputError("scenario header must be '" + std::string(kHeader) + "'");

  ScenarioTimeSeries s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto f = csv::split(text);
    if (f.size() != 7) {
      throw InputError("row " + std::to_string(row) + ": expected 7 fields, got " + std::to_string(f.size()));
    }
    const auto hour = csv::parse_int(f[0], row, kColumns[0]);
    if (hour != static_cast<long long>(s.hours())) {
      throw InputError(csv::where(row, kColumns[0]) + ": hours must be contiguous from 0, expected " +
                       std::to_string(s.hours()) + ", got " + std::to_string(hour));
    }
    std::vector<double>* targets[] = {&s.wind, &s.solar, &s.essential_load, &s.regular_load};
    for (std::size_t c = 0; c < 4; ++c) {
      const double v = csv::parse_double(f[c + 1], row, kColumns[c + 1]);
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError(csv::where(row, kColumns[c + 1]) + ": power must be non-negative, got " +
                         std::string(f[c + 1]));
      }
      targets[c]->push_back(v);
    }
    s.hilp.push_back(parse_flag(f[5], row, kColumns[5]));
    s.comm_loss.push_back(parse_flag(f[6], row, kColumns[6]));
  }
  s.validate(simulation_hours, lookahead);
  return s;
}

ScenarioTimeSeries load_scenario(const std::filesystem::path& path, std::size_t simulation_hours,
                                 std::size_t lookahead) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path.string());
  return read_scenario(in, simulation_hours, lookahead);
}

void write_scenario(std::ostream& out, const ScenarioTimeSeries& s) {
  out << kHeader << '\n';
  for (std::size_t h = 0; h < s.hours(); ++h) {
    out << h << ',' << csv::format_double(s.wind[h]) << ',' << csv::format_double(s.solar[h]) << ','
        << csv::format_double(s.essential_load[h]) << ',' << csv::format_double(s.regular_load[h]) << ','
        << (s.hilp[h] ? 1 : 0) << ',' << (s.comm_loss[h] ? 1 : 0) << '\n';
  }
}

void save_scenario(const std::filesystem::path& path, const ScenarioTimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write scenario file " + path.string());
  write_scenario(out, series);
}

ScenarioWindow window(const ScenarioTimeSeries& series, std::size_t start, std::size_t length, long known_through) {
  if (length == 0 || start + length > series.hours()) {
    throw InputError("window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") exceeds series of " + std::to_string(series.hours()) + " hours");
  }
  ScenarioWindow w;
  w.series = &series;
  w.start = start;
  w.length = length;
  w.known_through = known_through;
  w.wind = std::span(series.wind).subspan(start, length);
  w.solar = std::span(series.solar).subspan(start, length);
  w.essential_load = std::span(series.essential_load).subspan(start, length);
  w.regular_load = std::span(series.regular_load).subspan(start, length);
  w.available.resize(length);
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t h = start + k;
    w.available[k] = !(series.comm_loss[h] && static_cast<long>(h) > known_through);
  }
  return w;
}

ScenarioTimeSeries generate_synthetic(std::uint64_t seed, const GeneratorSettings& cfg) {
  const std::size_t n = cfg.hours;
  if (cfg.hilp_start > cfg.hilp_end || cfg.hilp_end >= n) {
    throw InputError("HILP window [" + std::to_string(cfg.hilp_start) + ", " + std::to_string(cfg.hilp_end) +
                     "] lies outside the " + std::to_string(n) + "-hour series");
  }
  if (cfg.comm_loss && (cfg.comm_loss_start > cfg.comm_loss_end || cfg.comm_loss_end >= n)) {
    throw InputError("comm-loss window lies outside the series");
  }
  if (!(cfg.wind_share > 0.0 && cfg.wind_share < 1.0)) throw InputError("wind_share must lie in (0,1)");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto noise = [&](double sd) { return std::clamp(1.0 + sd * gauss(rng), 1.0 - 2 * sd, 1.0 + 2 * sd); };

  auto in_event = [&](std::size_t h) { return h >= cfg.hilp_start && h <= cfg.hilp_end; };
  const std::size_t ramp = cfg.wind_ramp_hours;
  auto pre_ramp = [&](std::size_t h) { return h < cfg.hilp_start && h + ramp >= cfg.hilp_start; };
  auto post_ramp = [&](std::size_t h) { return h > cfg.hilp_end && h <= cfg.hilp_end + ramp; };

  ScenarioTimeSeries s;
  s.wind.resize(n);
  s.solar.resize(n);
  s.essential_load.resize(n);
  s.regular_load.resize(n);
  s.hilp.assign(n, false);
  s.comm_loss.assign(n, false);

  // Solar: half-sine between 06:00 and 18:00 under a per-day cloud factor.
  std::vector<double> cloud((n + 23) / 24);
  for (auto& c : cloud) c = 0.85 + 0.15 * unit(rng);
  for (std::size_t h = 0; h < n; ++h) {
    const double hod = static_cast<double>(h % 24);
    const double shape = (hod > 6.0 && hod < 18.0) ? std::sin(std::numbers::pi * (hod - 6.0) / 12.0) : 0.0;
    s.solar[h] = shape * cloud[h / 24] * noise(0.05);
    if (in_event(h)) s.solar[h] *= cfg.hilp_solar_factor;
  }

  // Wind: mean-reverting around 1 outside the storm.
  double level = 1.0;
  for (std::size_t h = 0; h < n; ++h) {
    level = std::clamp(1.0 + 0.6 * (level - 1.0) + 0.15 * gauss(rng), 0.2, 2.0);
    s.wind[h] = level;
  }
  double base_sum = 0.0;
  std::size_t base_count = 0;
  for (std::size_t h = 0; h < n; ++h) {
    if (in_event(h) || pre_ramp(h) || post_ramp(h)) continue;
    base_sum += s.wind[h];
    ++base_count;
  }
  const double base_mean = base_count ? base_sum / static_cast<double>(base_count) : 1.0;
  for (std::size_t h = 0; h < n; ++h) {
    if (in_event(h)) {
      s.wind[h] = 0.0;
    } else if (pre_ramp(h)) {
      const double pos = static_cast<double>(ramp - (cfg.hilp_start - h) + 1) / static_cast<double>(ramp);
      s.wind[h] = base_mean * (1.0 + (cfg.pre_event_wind_factor - 1.0) * pos) * noise(0.04);
    } else if (post_ramp(h)) {
      const double pos = static_cast<double>(h - cfg.hilp_end - 1) / static_cast<double>(ramp);
      s.wind[h] = base_mean * (cfg.post_event_wind_factor - (cfg.post_event_wind_factor - 1.0) * pos) * noise(0.04);
    }
  }

  // Loads: essential nearly flat, regular with morning and evening peaks.
  std::vector<double> day_shape(24);
  for (std::size_t hod = 0; hod < 24; ++hod) {
    const double t = static_cast<double>(hod);
    day_shape[hod] = 0.45 + 0.45 * std::exp(-(t - 8.0) * (t - 8.0) / 6.0) + 1.0 * std::exp(-(t - 19.5) * (t - 19.5) / 8.0);
  }
  const double shape_mean = std::accumulate(day_shape.begin(), day_shape.end(), 0.0) / 24.0;
  for (std::size_t h = 0; h < n; ++h) {
    s.essential_load[h] = cfg.essential_mean_kw * noise(0.015);
    s.regular_load[h] = cfg.regular_mean_kw * day_shape[h % 24] / shape_mean * noise(0.05);
  }

  // Match mean generation to mean load.
  const double load_sum = std::accumulate(s.essential_load.begin(), s.essential_load.end(), 0.0) +
                          std::accumulate(s.regular_load.begin(), s.regular_load.end(), 0.0);
  const double wind_sum = std::accumulate(s.wind.begin(), s.wind.end(), 0.0);
  const double solar_sum = std::accumulate(s.solar.begin(), s.solar.end(), 0.0);
  const double wind_scale = cfg.wind_share * load_sum / wind_sum;
  const double solar_scale = (1.0 - cfg.wind_share) * load_sum / solar_sum;
  for (std::size_t h = 0; h < n; ++h) {
    s.wind[h] *= wind_scale;
    s.solar[h] *= solar_scale;
  }

  for (std::size_t h = cfg.hilp_start; h <= cfg.hilp_end; ++h) s.hilp[h] = true;
  if (cfg.comm_loss) {
    for (std::size_t h = cfg.comm_loss_start; h <= cfg.comm_loss_end; ++h) s.comm_loss[h] = true;
  }
  return s;
}

}  // namespace mgrid::scenario
