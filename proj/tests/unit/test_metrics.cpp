#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgrid/error.hpp"
#include "mgrid/metrics.hpp"

#include <json.hpp>
#include <random>
#include <sstream>
#include <vector>

using namespace mgrid;
using battery::Mode;
using doctest::Approx;

namespace {

mpc::MpcDecision hour(double e_load, double r_load, double e_shed, double r_shed) {
  mpc::MpcDecision d;
  d.essential_load = e_load;
  d.regular_load = r_load;
  d.essential_shed = e_shed;
  d.regular_shed = r_shed;
  return d;
}

std::vector<mpc::MpcDecision> random_records(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> load(0.1, 3.0), frac(0.0, 1.0);
  std::vector<mpc::MpcDecision> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = load(rng), r = load(rng);
    out.push_back(hour(e, r, e * frac(rng), r * frac(rng)));
  }
  return out;
}

}  // namespace

TEST_CASE("count_switches: examples") {
  using V = std::vector<Mode>;
  CHECK(metrics::count_switches(V{Mode::Charge, Mode::Charge, Mode::Charge}) == 0);
  CHECK(metrics::count_switches(V{Mode::Charge, Mode::Discharge, Mode::Idle}) == 2);
  CHECK(metrics::count_switches(V{Mode::Idle, Mode::Charge, Mode::Charge, Mode::Discharge, Mode::Idle}) == 3);
}

TEST_CASE("count_switches: repeating the last mode adds nothing") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> m(0, 2);
  for (int i = 0; i < 100; ++i) {
    std::vector<Mode> modes(1 + i % 20);
    for (auto& x : modes) x = static_cast<Mode>(m(rng));
    const auto before = metrics::count_switches(modes);
    modes.push_back(modes.back());
    CHECK(metrics::count_switches(modes) == before);
  }
}

TEST_CASE("discharge_episodes counts maximal runs") {
  using V = std::vector<Mode>;
  CHECK(metrics::discharge_episodes(V{Mode::Idle, Mode::Idle}) == 0);
  CHECK(metrics::discharge_episodes(V{Mode::Discharge, Mode::Discharge, Mode::Idle, Mode::Discharge}) == 2);
  CHECK(metrics::discharge_episodes(V{Mode::Charge, Mode::Discharge, Mode::Charge, Mode::Discharge}) == 2);
}

TEST_CASE("resilience_index: examples") {
  mpc::Weights w;
  std::vector<mpc::MpcDecision> none{hour(1, 2, 0, 0), hour(1, 1, 0, 0)};
  CHECK(metrics::resilience_index(none, w) == 1.0);
  std::vector<mpc::MpcDecision> all{hour(1, 2, 1, 2), hour(1, 1, 1, 1)};
  CHECK(metrics::resilience_index(all, w) == Approx(0.0));

  // Weighted loads (4, 4), weighted losses (1, 0).
  mpc::Weights unit;
  unit.w_essential = 1.0;
  unit.w_regular = 1.0;
  std::vector<mpc::MpcDecision> two{hour(2, 2, 0.5, 0.5), hour(2, 2, 0, 0)};
  CHECK(metrics::resilience_index(two, unit) == Approx(0.875));

  std::vector<mpc::MpcDecision> empty_load{hour(0, 0, 0, 0)};
  CHECK_THROWS_AS((void)metrics::resilience_index(empty_load, w), InputError);
  CHECK_THROWS_AS((void)metrics::resilience_index({}, w), InputError);
}

TEST_CASE("resilience_index: scale invariant, antitone in shed, inside [0, 1]") {
  mpc::Weights w;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> scale(0.01, 100.0), frac(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, 9);
  for (int i = 0; i < 100; ++i) {
    auto recs = random_records(rng, 10);
    const double ri = metrics::resilience_index(recs, w);
    CHECK(ri >= 0.0);
    CHECK(ri <= 1.0);

    auto scaled = recs;
    const double c = scale(rng);
    for (auto& r : scaled) {
      r.essential_load *= c;
      r.regular_load *= c;
      r.essential_shed *= c;
      r.regular_shed *= c;
    }
    CHECK(metrics::resilience_index(scaled, w) == Approx(ri).epsilon(1e-12));

    auto more = recs;
    auto& r = more[pick(rng)];
    r.regular_shed += (r.regular_load - r.regular_shed) * frac(rng);
    r.essential_shed += (r.essential_load - r.essential_shed) * frac(rng);
    CHECK(metrics::resilience_index(more, w) <= ri);
  }
}

TEST_CASE("loss_totals") {
  const auto zero = metrics::loss_totals(std::vector<mpc::MpcDecision>{hour(1, 1, 0, 0)});
  CHECK(zero.total == 0.0);
  const auto t = metrics::loss_totals(std::vector<mpc::MpcDecision>{hour(4, 4, 2, 3)});
  CHECK(t.essential == 2.0);
  CHECK(t.regular == 3.0);
  CHECK(t.total == 5.0);
  std::mt19937_64 rng(13);
  const auto recs = random_records(rng, 72);
  const auto r = metrics::loss_totals(recs);
  CHECK(r.total == r.essential + r.regular);
}

TEST_CASE("trace and RI curve round-trip") {
  std::mt19937_64 rng(14);
  auto recs = random_records(rng, 5);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].hour = i;
    recs[i].mode = static_cast<Mode>(i % 3);
    recs[i].p_ch = 0.1 * static_cast<double>(i);
    recs[i].soc_after = 0.2 + 0.1 * static_cast<double>(i);
    recs[i].surplus = 1.0 / 3.0;
    recs[i].expected_ri = 0.9 + 0.01 * static_cast<double>(i);
  }
  std::ostringstream out;
  metrics::write_trace(out, recs);
  std::istringstream in(out.str());
  const auto back = metrics::read_trace(in);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].hour == recs[i].hour);
    CHECK(back[i].mode == recs[i].mode);
    CHECK(back[i].p_ch == recs[i].p_ch);
    CHECK(back[i].soc_after == recs[i].soc_after);
    CHECK(back[i].essential_shed == recs[i].essential_shed);
    CHECK(back[i].regular_shed == recs[i].regular_shed);
    CHECK(back[i].surplus == recs[i].surplus);
    CHECK(back[i].expected_ri == recs[i].expected_ri);
  }

  const std::vector<metrics::RiPoint> curve{{0, 0.96}, {1, 1.0 / 7.0}, {2, 0.5}};
  std::ostringstream cout_;
  metrics::write_ri_curve(cout_, curve);
  std::istringstream cin_(cout_.str());
  CHECK(metrics::read_ri_curve(cin_) == curve);

  std::istringstream bad("hour,ri\n0,1\n");
  CHECK_THROWS_AS((void)metrics::read_ri_curve(bad), InputError);
}

TEST_CASE("summary JSON carries the fixed field names") {
  std::vector<mpc::MpcDecision> recs{hour(1, 1, 0, 0.5), hour(1, 1, 0, 0)};
  recs[0].mode = Mode::Discharge;
  recs[0].soc_after = 0.7;
  recs[1].soc_after = 0.7;
  const auto res = metrics::summarize(recs, {{0, 0.9}, {1, 0.95}}, 0.9, mpc::Weights{},
                                      battery::default_blc_curve(), std::nullopt);
  const auto j = nlohmann::json::parse(metrics::summary_json(res));
  for (const char* key : {"switches", "discharge_episodes", "essential_loss_kwh", "regular_loss_kwh",
                          "total_loss_kwh", "resilience_index", "lifespan_years", "rmse"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["switches"] == 1);
  CHECK(j["discharge_episodes"] == 1);
  CHECK(j["total_loss_kwh"].get<double>() == Approx(0.5));
  CHECK(j["rmse"].is_null());
  CHECK(j["lifespan_years"].is_number());

  const auto idle = metrics::summarize({hour(1, 1, 0, 0)}, {{0, 1.0}}, 0.5, mpc::Weights{},
                                       battery::default_blc_curve(), forecast::RmseReport{});
  const auto k = nlohmann::json::parse(metrics::summary_json(idle));
  CHECK(k["lifespan_years"] == "no-cycling");
  CHECK(k["rmse"].contains("essential"));
}
