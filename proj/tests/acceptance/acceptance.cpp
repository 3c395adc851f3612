// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, capped at 1.

#include "mgrid/battery.hpp"
#include "mgrid/forecast.hpp"
#include "mgrid/metrics.hpp"
#include "mgrid/milp.hpp"
#include "mgrid/mpc.hpp"
#include "mgrid/scenario.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

using namespace mgrid;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string trace_bytes(const metrics::SimulationResult& r) {
  std::ostringstream out;
  metrics::write_trace(out, r.records);
  metrics::write_ri_curve(out, r.ri_curve);
  out << metrics::summary_json(r);
  return out.str();
}

void milp_oracle() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> nb(1, 12), nc(1, 6), nr(1, 10);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int mismatches = 0, optimal = 0;
  for (int i = 0; i < 50; ++i) {
    const auto p = oracle::random_milp(100 + i, nb(rng), nc(rng), nr(rng));
    const auto expected = oracle::enumerate_binaries(p);
    const auto s = milp::solve_milp(p);
    if (!expected) {
      mismatches += s.status != milp::SolveStatus::Infeasible;
      continue;
    }
    ++optimal;
    if (s.status != milp::SolveStatus::Optimal) {
      ++mismatches;
      continue;
    }
    const double err = std::abs(s.objective - *expected);
    worst = std::max(worst, err);
    mismatches += err > 1e-6;
  }
  const double secs = seconds_since(t0);
  report("milp-oracle", mismatches == 0 && secs < 10.0,
         fmt("50 problems (%d feasible), max |diff| %.2e, %.2f s", optimal, worst, secs));
}

void piecewise_exactness() {
  const auto curve = battery::default_blc_curve();
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(curve.x_min(), curve.x_max());
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool solved = true;
  for (int i = 0; i < 100; ++i) {
    const double dod = u(rng);
    for (double sign : {1.0, -1.0}) {
      milp::MilpProblem p;
      const auto x = p.add_variable(dod, dod);
      const auto enc = milp::encode_piecewise(p, x, curve);
      p.add_objective(enc.y, sign);
      const auto s = milp::solve_milp(p);
      if (s.status != milp::SolveStatus::Optimal) {
        solved = false;
        continue;
      }
      worst = std::max(worst, std::abs(s.value(enc.y) - battery::blc_eval(curve, dod)));
    }
  }
  const double secs = seconds_since(t0);
  report("piecewise-exactness", solved && worst <= 1e-6 && secs < 10.0,
         fmt("100 DODs, y minimized and maximized, max |diff| %.2e cycles, %.2f s", worst, secs));
}

void toy_horizons() {
  const auto curve = battery::default_blc_curve();
  milp::SolverOptions exact;
  exact.relative_gap = 1e-9;
  double worst = 0.0;
  int bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = oracle::random_toy(seed);
    const mpc::HorizonInputs in{t.generation, t.essential, t.regular, {false, false}};
    const auto hp = mpc::build_horizon_problem(in, t.soc0, t.prev, t.weights, t.params, curve);
    const auto plan = mpc::solve_horizon(hp, exact);
    const auto best = oracle::brute_force(t, curve);
    const double err = std::abs(plan.full_objective - best.objective);
    worst = std::max(worst, err);
    bad += plan.status != milp::SolveStatus::Optimal || err > 1e-3;
  }
  report("toy-horizon-optimality", bad == 0, fmt("20 instances, max |diff| %.2e", worst));
}

void priority() {
  battery::BatteryParams bp;
  milp::SolverOptions exact;
  exact.relative_gap = 1e-9;
  bool ok = true;
  std::string detail;
  for (double deficit : {0.5, 1.0, 1.5}) {
    const mpc::HorizonInputs in{{2.0 - deficit}, {1.0}, {1.0}, {false}};
    mpc::Weights w;
    const auto a = mpc::solve_horizon(
        mpc::build_horizon_problem(in, bp.soc_min, battery::Mode::Idle, w, bp, battery::default_blc_curve()), exact);
    std::swap(w.w_essential, w.w_regular);
    const auto b = mpc::solve_horizon(
        mpc::build_horizon_problem(in, bp.soc_min, battery::Mode::Idle, w, bp, battery::default_blc_curve()), exact);
    const auto& x = a.hours[0];
    const auto& y = b.hours[0];
    ok = ok && x.shed_essential <= x.shed_regular + 1e-9 && y.shed_regular <= y.shed_essential + 1e-9 &&
         std::abs(x.shed_essential - y.shed_regular) < 1e-9 && std::abs(x.shed_regular - y.shed_essential) < 1e-9;
    detail += fmt("deficit %.1f: (%.2f, %.2f) -> (%.2f, %.2f); ", deficit, x.shed_essential, x.shed_regular,
                  y.shed_essential, y.shed_regular);
  }
  detail += "pairs are (essential, regular) shed, default then swapped weights";
  report("priority", ok, detail);
}

void full_run_suite() {
  const auto series = scenario::generate_synthetic(7);
  mpc::EngineConfig cfg;

  const auto t0 = std::chrono::steady_clock::now();
  const auto run = mpc::run(series, cfg);
  const double secs = seconds_since(t0);

  // Invariants.
  {
    const auto& bp = cfg.params;
    int bad = 0;
    for (const auto& r : run.records) {
      bad += r.soc_after < bp.soc_min - 1e-9 || r.soc_after > bp.soc_max + 1e-9;
      bad += std::min(r.p_ch, r.p_dis) != 0.0;
      bad += r.mode == battery::Mode::Idle && (r.p_ch != 0.0 || r.p_dis != 0.0);
      bad += r.mode == battery::Mode::Charge && r.p_dis != 0.0;
      bad += r.mode == battery::Mode::Discharge && r.p_ch != 0.0;
      bad += r.essential_shed > r.essential_load || r.regular_shed > r.regular_load;
      bad += r.essential_shed < 0.0 || r.regular_shed < 0.0;
    }
    const bool totals = run.losses.total == run.losses.essential + run.losses.regular;
    const bool ri = run.resilience_index >= 0.0 && run.resilience_index <= 1.0;
    report("full-run-invariants", bad == 0 && totals && ri && run.records.size() == 72 && secs < 60.0,
           fmt("%zu decisions, %d violations, RI %.4f, %.1f s", run.records.size(), bad, run.resilience_index, secs));
  }

  // Charging ahead of the event.
  {
    const double soc = run.records.at(26).soc_after;
    report("pre-event-charging", soc >= 0.85, fmt("SOC after hour 26 = %.4f", soc));
  }

  // Expected-RI trough and recovery.
  {
    const auto& c = run.ri_curve;
    const auto low = std::min_element(c.begin(), c.end(), [](const auto& a, const auto& b) {
      return a.expected_ri < b.expected_ri;
    });
    double pre = 0.0;
    for (std::size_t h = 0; h <= 3; ++h) pre += c[h].expected_ri;
    pre /= 4.0;
    const double at50 = c.at(50).expected_ri;
    const bool in_window = low->hour >= 27 && low->hour <= 39;
    const bool recovered = std::abs(at50 - pre) <= 0.02;
    report("expected-ri-trough", in_window && recovered,
           fmt("minimum %.4f at hour %zu, pre-event mean %.4f, hour 50 %.4f", low->expected_ri, low->hour, pre, at50));
  }

  // Comm-loss robustness.
  {
    auto full = cfg;
    full.comm_loss = false;
    const auto clear = mpc::run(series, full);
    const double d = std::abs(run.resilience_index - clear.resilience_index);
    const auto rmse = forecast::comm_loss_rmse(series);
    const bool ok = d <= 0.01 && rmse && rmse->essential < rmse->regular;
    report("comm-loss-robustness", ok,
           fmt("RI %.6f vs %.6f full-information, |diff| %.2e; RMSE essential %.4f < regular %.4f", run.resilience_index,
               clear.resilience_index, d, rmse ? rmse->essential : -1.0, rmse ? rmse->regular : -1.0));
  }

  // Locality and determinism.
  {
    const auto again = mpc::run(series, cfg);
    const bool same = trace_bytes(run) == trace_bytes(again);

    // Data past hour t + 24 is replaced; decisions up to t must not move.
    bool local = true;
    std::string where;
    for (std::size_t t : {10, 30, 47}) {
      auto changed = series;
      for (std::size_t h = t + cfg.horizon; h < changed.hours(); ++h) {
        changed.wind[h] = 0.0;
        changed.solar[h] *= 0.5;
        changed.essential_load[h] += 0.7;
        changed.regular_load[h] *= 2.0;
      }
      // Comm-loss flags must lie inside the simulated hours, so the run
      // stops at t or at the end of the gap, whichever is later.
      auto short_cfg = cfg;
      const auto gap = changed.comm_loss_hours();
      short_cfg.simulation_hours = std::max(t, gap.empty() ? t : gap.back()) + 1;
      const auto r = mpc::run(changed, short_cfg);
      for (std::size_t h = 0; h <= t; ++h) local = local && r.records[h] == run.records[h];
      where += fmt(" %zu", t);
    }
    report("locality-determinism", same && local,
           fmt("repeat run %s; tail replaced past t+24 for t =%s: prefixes %s", same ? "byte-identical" : "DIFFERS",
               where.c_str(), local ? "unchanged" : "CHANGED"));
  }
}

}  // namespace

int main() {
  milp_oracle();
  piecewise_exactness();
  toy_horizons();
  priority();
  full_run_suite();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
