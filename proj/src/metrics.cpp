#include "mgrid/metrics.hpp"

#include "csv_util.hpp"
#include "mgrid/error.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <json.hpp>
#include <ostream>
#include <string>

namespace mgrid::metrics {

using battery::Mode;

std::size_t count_switches(std::span<const Mode> modes) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < modes.size(); ++i) {
    if (modes[i] != modes[i - 1]) ++n;
  }
  return n;
}

std::size_t discharge_episodes(std::span<const Mode> modes) {
  std::size_t n = 0;
  bool in_run = false;
  for (Mode m : modes) {
    const bool dis = m == Mode::Discharge;
    if (dis && !in_run) ++n;
    in_run = dis;
  }
  return n;
}

double resilience_index(std::span<const mpc::MpcDecision> records, const mpc::Weights& weights) {
  if (records.empty()) throw InputError("resilience index needs at least one record");
  double loss = 0.0;
  double load = 0.0;
  for (const auto& r : records) {
    loss += weights.w_essential * r.essential_shed + weights.w_regular * r.regular_shed;
    load += weights.w_essential * r.essential_load + weights.w_regular * r.regular_load;
  }
  if (!(load > 0.0)) throw InputError("resilience index undefined: total weighted load is zero");
  return 1.0 - loss / load;
}

LossTotals loss_totals(std::span<const mpc::MpcDecision> records) {
  LossTotals t;
  for (const auto& r : records) {
    t.essential += r.essential_shed;
    t.regular += r.regular_shed;
  }
  t.total = t.essential + t.regular;
  return t;
}

SimulationResult summarize(std::vector<mpc::MpcDecision> records, std::vector<RiPoint> ri_curve, double soc_start,
                           const mpc::Weights& weights, const battery::BlcCurve& curve,
                           std::optional<forecast::RmseReport> rmse) {
  SimulationResult res;
  std::vector<Mode> modes;
  std::vector<battery::HourState> states;
  modes.reserve(records.size());
  states.reserve(records.size());
  for (const auto& r : records) {
    modes.push_back(r.mode);
    states.push_back({r.mode, r.soc_after});
  }
  res.switches = count_switches(modes);
  res.discharge_episodes = discharge_episodes(modes);
  res.losses = loss_totals(records);
  res.resilience_index = resilience_index(records, weights);
  res.lifespan = battery::estimate_lifespan(soc_start, states, curve);
  res.rmse = rmse;
  res.soc_start = soc_start;
  res.records = std::move(records);
  res.ri_curve = std::move(ri_curve);
  return res;
}

namespace {

constexpr const char* kTraceHeader = "hour,mode,p_ch,p_dis,soc,essential_shed,regular_shed,surplus,expected_ri";

std::string read_header(std::istream& in, const char* expected, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(std::string(what) + " is empty");
  std::string header(csv::trim_cr(line));
  if (header != expected) throw InputError(std::string(what) + " header must be '" + expected + "'");
  return header;
}

}  // namespace

void write_trace(std::ostream& out, std::span<const mpc::MpcDecision> records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    out << r.hour << ',' << battery::to_string(r.mode) << ',' << csv::format_double(r.p_ch) << ','
        << csv::format_double(r.p_dis) << ',' << csv::format_double(r.soc_after) << ','
        << csv::format_double(r.essential_shed) << ',' << csv::format_double(r.regular_shed) << ','
        << csv::format_double(r.surplus) << ',' << csv::format_double(r.expected_ri) << '\n';
  }
}

std::vector<mpc::MpcDecision> read_trace(std::istream& in) {
  read_header(in, kTraceHeader, "trace");
  std::vector<mpc::MpcDecision> out;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto f = csv::split(text);
    if (f.size() != 9) throw InputError("trace row " + std::to_string(row) + ": expected 9 fields");
    mpc::MpcDecision d;
    d.hour = static_cast<std::size_t>(csv::parse_int(f[0], row, "hour"));
    d.mode = battery::parse_mode(f[1]);
    d.p_ch = csv::parse_double(f[2], row, "p_ch");
    d.p_dis = csv::parse_double(f[3], row, "p_dis");
    d.soc_after = csv::parse_double(f[4], row, "soc");
    d.essential_shed = csv::parse_double(f[5], row, "essential_shed");
    d.regular_shed = csv::parse_double(f[6], row, "regular_shed");
    d.surplus = csv::parse_double(f[7], row, "surplus");
    d.expected_ri = csv::parse_double(f[8], row, "expected_ri");
    out.push_back(d);
  }
  return out;
}

void write_ri_curve(std::ostream& out, std::span<const RiPoint> curve) {
  out << "hour,expected_ri\n";
  for (const auto& p : curve) out << p.hour << ',' << csv::format_double(p.expected_ri) << '\n';
}

std::vector<RiPoint> read_ri_curve(std::istream& in) {
  read_header(in, "hour,expected_ri", "RI curve");
  std::vector<RiPoint> out;
  std::string line;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::trim_cr(line);
    if (text.empty()) continue;
    const auto f = csv::split(text);
    if (f.size() != 2) throw InputError("RI curve row " + std::to_string(row) + ": expected 2 fields");
    out.push_back({static_cast<std::size_t>(csv::parse_int(f[0], row, "hour")),
                   csv::parse_double(f[1], row, "expected_ri")});
  }
  return out;
}

std::string summary_json(const SimulationResult& r) {
  nlohmann::ordered_json j;
  j["switches"] = r.switches;
  j["discharge_episodes"] = r.discharge_episodes;
  j["essential_loss_kwh"] = r.losses.essential;
  j["regular_loss_kwh"] = r.losses.regular;
  j["total_loss_kwh"] = r.losses.total;
  j["resilience_index"] = r.resilience_index;
  if (r.lifespan.cycling) {
    j["lifespan_years"] = r.lifespan.years;
  } else {
    j["lifespan_years"] = "no-cycling";
  }
  if (r.rmse) {
    j["rmse"] = {{"essential", r.rmse->essential}, {"regular", r.rmse->regular}, {"total", r.rmse->total}};
  } else {
    j["rmse"] = nullptr;
  }
  j["hours"] = r.records.size();
  j["mean_episode_depth"] = r.lifespan.mean_depth;
  return j.dump(2) + "\n";
}

void write_outputs(const std::filesystem::path& dir, const SimulationResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("trace.csv");
    write_trace(out, result.records);
  }
  {
    auto out = open("ri_curve.csv");
    write_ri_curve(out, result.ri_curve);
  }
  {
    auto out = open("summary.json");
    out << summary_json(result);
  }
}

}  // namespace mgrid::metrics
