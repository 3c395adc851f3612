#include "mgrid/battery.hpp"

#include "csv_util.hpp"
#include "mgrid/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

namespace mgrid::battery {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Charge: return "CH";
    case Mode::Discharge: return "DIS";
    case Mode::Idle: return "IDLE";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "CH") return Mode::Charge;
  if (text == "DIS") return Mode::Discharge;
  if (text == "IDLE") return Mode::Idle;
  throw InputError("unknown battery mode '" + std::string(text) + "'");
}

void BatteryParams::validate() const {
  auto fail = [](const std::string& what) { throw InputError("battery parameters: " + what); };
  if (!(0.0 <= soc_min && soc_min < soc_init && soc_init < soc_max && soc_max <= 1.0)) {
    fail("require 0 <= soc_min < soc_init < soc_max <= 1");
  }
  if (!(eta_ch > 0.0 && eta_ch <= 1.0) || !(eta_dis > 0.0 && eta_dis <= 1.0)) fail("efficiencies must lie in (0,1]");
  if (!(p_max > 0.0)) fail("p_max must be positive");
  if (!(e_max > 0.0)) fail("e_max must be positive");
  if (!(c_bat >= 0.0 && c_ch_dis >= 0.0 && c_no_ch_dis >= 0.0 && c_idle >= 0.0)) fail("costs must be non-negative");
}

BlcCurve default_blc_curve() {
  return make_blc_curve({{0.1, 15000},
                         {0.2, 9000},
                         {0.3, 6000},
                         {0.4, 4500},
                         {0.5, 3500},
                         {0.6, 2800},
                         {0.7, 2300},
                         {0.8, 1900},
                         {0.9, 1600}});
}

BlcCurve make_blc_curve(std::vector<milp::Breakpoint> points) {
  if (points.size() != kBlcBreakpoints) {
    throw InputError("lifecycle curve needs " + std::to_string(kBlcBreakpoints) + " breakpoints, got " +
                     std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.x > 0.0 && p.x <= 1.0)) throw InputError("lifecycle curve depth must lie in (0,1]");
    if (!(p.y > 0.0)) throw InputError("lifecycle curve cycle counts must be positive");
    if (i > 0 && !(p.x > points[i - 1].x)) throw InputError("lifecycle curve depth must be strictly increasing");
    if (i > 0 && !(p.y < points[i - 1].y)) throw InputError("lifecycle curve cycles must be strictly decreasing");
  }
  return BlcCurve(std::move(points));
}

BlcCurve read_blc_curve(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("lifecycle curve file is empty");
  if (csv::trim_cr(line) != "dod,cycles") throw InputError("lifecycle curve header must be 'dod,cycles'");
  std::vector<milp::Breakpoint> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto fields = csv::split(text);
    if (fields.size() != 2) throw InputError("lifecycle curve row " + std::to_string(row) + ": expected 2 fields");
    points.push_back({csv::parse_double(fields[0], row, "dod"), csv::parse_double(fields[1], row, "cycles")});
  }
  return make_blc_curve(std::move(points));
}

BlcCurve load_blc_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lifecycle curve file " + path.string());
  return read_blc_curve(in);
}

void write_blc_curve(std::ostream& out, const BlcCurve& curve) {
  out << "dod,cycles\n";
  for (const auto& p : curve.points()) out << csv::format_double(p.x) << ',' << csv::format_double(p.y) << '\n';
}

double soc_update(double soc, double p_ch, double p_dis, const BatteryParams& params) {
  if (p_ch < 0.0 || p_dis < 0.0) throw InputError("battery powers must be non-negative");
  if (p_ch > 0.0 && p_dis > 0.0) throw InputError("battery cannot charge and discharge in the same hour");
  return soc + (params.eta_ch * p_ch - p_dis / params.eta_dis) / params.e_max;
}

double blc_eval(const BlcCurve& curve, double dod) { return curve(dod); }

double switching_cost(Mode prev, Mode next, const BatteryParams& params) {
  double cost = 0.0;
  if (prev != next) {
    cost = (prev == Mode::Idle || next == Mode::Idle) ? params.c_no_ch_dis : params.c_ch_dis;
  }
  if (next == Mode::Idle) cost += params.c_idle;
  return cost;
}

LifespanEstimate estimate_lifespan(double soc_start, std::span<const HourState> hours, const BlcCurve& curve) {
  if (hours.empty()) throw InputError("lifespan estimate needs at least one simulated hour");
  LifespanEstimate est;
  est.days = static_cast<double>(hours.size()) / 24.0;
  double depth_sum = 0.0;
  double soc_before = soc_start;
  for (std::size_t h = 0; h < hours.size();) {
    if (hours[h].mode != Mode::Discharge) {
      soc_before = hours[h].soc_after;
      ++h;
      continue;
    }
    const double top = soc_before;
    while (h < hours.size() && hours[h].mode == Mode::Discharge) ++h;
    const double bottom = hours[h - 1].soc_after;
    depth_sum += std::max(0.0, top - bottom);
    ++est.episodes;
    soc_before = bottom;
  }
  if (est.episodes == 0) return est;
  est.cycling = true;
  est.mean_depth = depth_sum / static_cast<double>(est.episodes);
  const double depth = std::clamp(est.mean_depth, curve.x_min(), curve.x_max());
  const double per_year = static_cast<double>(est.episodes) / est.days * 365.0;
  est.years = blc_eval(curve, depth) / per_year;
  return est;
}

}  // namespace mgrid::battery
