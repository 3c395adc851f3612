// mgrid: command-line front end for the microgrid MPC simulator.
//
//   mgrid generate --seed 7 -o scenario.csv
//   mgrid simulate --synthetic --seed 7 -o out/
//   mgrid simulate scenario.csv -o out/ --stride day
//   mgrid rmse scenario.csv

#include "mgrid/battery.hpp"
#include "mgrid/error.hpp"
#include "mgrid/forecast.hpp"
#include "mgrid/metrics.hpp"
#include "mgrid/milp.hpp"
#include "mgrid/mpc.hpp"
#include "mgrid/scenario.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

using namespace mgrid;

struct SimulateArgs {
  std::string scenario_path;
  bool synthetic = false;
  std::uint64_t seed = 7;
  mpc::EngineConfig config;
  std::string curve_path;
  std::string output_dir = "out";
  bool full_information = false;
  std::string dump_path;
  std::size_t dump_hour = 0;
};

struct GenerateArgs {
  std::uint64_t seed = 7;
  scenario::GeneratorSettings settings;
  bool no_comm_loss = false;
  std::string output = "scenario.csv";
};

int cmd_simulate(SimulateArgs& a) {
  a.config.weights.validate();
  if (!a.curve_path.empty()) a.config.curve = battery::load_blc_curve(a.curve_path);
  a.config.comm_loss = !a.full_information;
  const auto series = a.synthetic ? scenario::generate_synthetic(a.seed) : scenario::load_scenario(a.scenario_path);

  if (!a.dump_path.empty()) {
    a.config.on_problem = [&](std::size_t hour, const milp::MilpProblem& problem) {
      if (hour != a.dump_hour) return;
      std::ofstream out(a.dump_path);
      if (!out) throw InputError("cannot write " + a.dump_path);
      milp::write_lp_format(out, problem);
    };
  }

  const auto result = mpc::run(series, a.config);
  metrics::write_outputs(a.output_dir, result);
  std::cout << metrics::summary_json(result);
  return 0;
}

int cmd_generate(GenerateArgs& a) {
  if (a.no_comm_loss) a.settings.comm_loss = false;
  const auto series = scenario::generate_synthetic(a.seed, a.settings);
  scenario::save_scenario(a.output, series);
  std::cout << "wrote " << series.hours() << " hours to " << a.output << "\n";
  return 0;
}

int cmd_rmse(const std::string& path) {
  const auto series = scenario::load_scenario(path);
  const auto report = forecast::comm_loss_rmse(series);
  if (!report) {
    std::cout << "no comm-loss window\n";
    return 0;
  }
  std::cout << "hours " << report->hours << "\n"
            << "essential " << report->essential << "\n"
            << "regular " << report->regular << "\n"
            << "total " << report->total << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microgrid battery scheduling with sliding-window MILP control"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the 72-hour receding-horizon simulation");
  auto* path_opt = simulate->add_option("scenario", sim.scenario_path, "Scenario CSV")->check(CLI::ExistingFile);
  auto* synth_opt = simulate->add_flag("--synthetic", sim.synthetic, "Use a generated scenario");
  simulate->add_option("--seed", sim.seed, "Seed for --synthetic")->needs(synth_opt);
  path_opt->excludes(synth_opt);

  auto& w = sim.config.weights;
  const auto unit = CLI::Range(0.0, 1.0);
  simulate->add_option("--w-bat", w.w_bat, "Switching cost weight")->check(unit)->capture_default_str();
  simulate->add_option("--w-blc", w.w_blc, "Lifecycle credit weight")->check(unit)->capture_default_str();
  simulate->add_option("--w-t", w.w_t, "Imbalance penalty weight")->check(unit)->capture_default_str();
  simulate->add_option("--w-r", w.w_r, "Resilience credit weight")->check(unit)->capture_default_str();
  simulate->add_option("--w-essential", w.w_essential, "Essential load priority")->check(unit)->capture_default_str();
  simulate->add_option("--w-regular", w.w_regular, "Regular load priority")->check(unit)->capture_default_str();

  auto& bp = sim.config.params;
  simulate->add_option("--e-max", bp.e_max, "Battery capacity, kWh")->capture_default_str();
  simulate->add_option("--p-max", bp.p_max, "Battery power limit, kW")->capture_default_str();
  simulate->add_option("--soc-init", bp.soc_init, "Initial SOC")->capture_default_str();
  simulate->add_option("--soc-min", bp.soc_min, "Minimum SOC")->capture_default_str();
  simulate->add_option("--soc-max", bp.soc_max, "Maximum SOC")->capture_default_str();
  simulate->add_option("--eta-ch", bp.eta_ch, "Charge efficiency")->capture_default_str();
  simulate->add_option("--eta-dis", bp.eta_dis, "Discharge efficiency")->capture_default_str();
  simulate->add_option("--curve", sim.curve_path, "Lifecycle curve CSV (dod,cycles)")->check(CLI::ExistingFile);

  const std::map<std::string, mpc::Stride> strides{{"hour", mpc::Stride::Hour}, {"day", mpc::Stride::Day}};
  simulate->add_option("--stride", sim.config.stride, "Re-planning stride")
      ->transform(CLI::CheckedTransformer(strides, CLI::ignore_case));
  simulate->add_flag("--full-information", sim.full_information, "Ignore comm-loss flags");
  simulate->add_option("-o,--output", sim.output_dir, "Output directory")->capture_default_str();
  auto* dump = simulate->add_option("--dump-milp", sim.dump_path, "Write one decision hour's MILP to this file");
  simulate->add_option("--dump-hour", sim.dump_hour, "Decision hour for --dump-milp")->needs(dump);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic scenario CSV");
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--hours", gen.settings.hours, "Series length")->capture_default_str();
  generate->add_option("--hilp-start", gen.settings.hilp_start, "First event hour")->capture_default_str();
  generate->add_option("--hilp-end", gen.settings.hilp_end, "Last event hour (inclusive)")->capture_default_str();
  generate->add_option("--comm-loss-start", gen.settings.comm_loss_start, "First comm-loss hour")
      ->capture_default_str();
  generate->add_option("--comm-loss-end", gen.settings.comm_loss_end, "Last comm-loss hour (inclusive)")
      ->capture_default_str();
  generate->add_flag("--no-comm-loss", gen.no_comm_loss, "Generate without a comm-loss window");
  generate->add_option("-o,--output", gen.output, "Output CSV")->capture_default_str();

  std::string rmse_path;
  auto* rmse = app.add_subcommand("rmse", "Forecast error over a scenario's comm-loss window");
  rmse->add_option("scenario", rmse_path, "Scenario CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      if (!sim.synthetic && sim.scenario_path.empty()) {
        throw InputError("simulate needs a scenario path or --synthetic");
      }
      return cmd_simulate(sim);
    }
    if (*generate) return cmd_generate(gen);
    return cmd_rmse(rmse_path);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  }
}
