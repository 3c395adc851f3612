#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgrid/battery.hpp"
#include "mgrid/error.hpp"

#include <random>
#include <sstream>
#include <vector>

using namespace mgrid::battery;
using doctest::Approx;

TEST_CASE("soc_update: hand-computed steps") {
  BatteryParams bp;
  CHECK(soc_update(0.5, 1.0, 0.0, bp) == Approx(0.725));
  CHECK(soc_update(0.725, 0.0, 0.95, bp) == Approx(0.475));
  CHECK(soc_update(0.61, 0.0, 0.0, bp) == 0.61);
}

TEST_CASE("soc_update: affine and monotone") {
  BatteryParams bp;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> p(0.0, 4.0), s(0.2, 0.9);
  for (int i = 0; i < 200; ++i) {
    const double soc = s(rng), a = p(rng), b = p(rng);
    CHECK(soc_update(soc, std::max(a, b), 0, bp) >= soc_update(soc, std::min(a, b), 0, bp));
    CHECK(soc_update(soc, 0, std::max(a, b), bp) <= soc_update(soc, 0, std::min(a, b), bp));
    // Affine in the charge power: the midpoint maps to the midpoint.
    const double mid = soc_update(soc, 0.5 * (a + b), 0, bp);
    CHECK(mid == Approx(0.5 * (soc_update(soc, a, 0, bp) + soc_update(soc, b, 0, bp))));
  }
}

TEST_CASE("soc_update: charge then discharge of eta_ch * eta_dis * p returns home") {
  BatteryParams bp;
  for (double p : {0.3, 1.0, 2.5}) {
    const double up = soc_update(0.4, p, 0, bp);
    CHECK(soc_update(up, 0, bp.eta_ch * bp.eta_dis * p, bp) == Approx(0.4).epsilon(1e-12));
  }
}

TEST_CASE("blc_eval: default curve lookups") {
  const auto c = default_blc_curve();
  CHECK(blc_eval(c, 0.2) == 9000.0);
  CHECK(blc_eval(c, 0.15) == Approx(12000.0));
  CHECK(blc_eval(c, 0.9) == 1600.0);
  CHECK_THROWS_AS((void)blc_eval(c, 0.95), mgrid::InputError);
}

TEST_CASE("blc_eval: strictly decreasing and continuous") {
  const auto c = default_blc_curve();
  std::vector<double> xs;
  for (const auto& p : c.points()) xs.push_back(p.x);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int i = 0; i < 200; ++i) xs.push_back(u(rng));
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] == xs[i - 1]) continue;
    CHECK(blc_eval(c, xs[i]) < blc_eval(c, xs[i - 1]));
  }
  for (const auto& p : c.points()) {
    if (p.x == c.x_min() || p.x == c.x_max()) continue;
    CHECK(blc_eval(c, p.x - 1e-9) == Approx(p.y).epsilon(1e-6));
    CHECK(blc_eval(c, p.x + 1e-9) == Approx(p.y).epsilon(1e-6));
  }
}

TEST_CASE("dod_of is the complement") {
  CHECK(dod_of(1.0) == 0.0);
  CHECK(dod_of(0.2) == Approx(0.8));
  CHECK(dod_of(0.55) == Approx(0.45));
}

TEST_CASE("switching_cost: table values") {
  BatteryParams bp;
  CHECK(switching_cost(Mode::Charge, Mode::Discharge, bp) == Approx(0.055));
  CHECK(switching_cost(Mode::Charge, Mode::Charge, bp) == 0.0);
  CHECK(switching_cost(Mode::Discharge, Mode::Idle, bp) == Approx(0.0825));
}

TEST_CASE("switching_cost: symmetry and diagonal") {
  BatteryParams bp;
  CHECK(switching_cost(Mode::Charge, Mode::Discharge, bp) == switching_cost(Mode::Discharge, Mode::Charge, bp));
  CHECK(switching_cost(Mode::Discharge, Mode::Discharge, bp) == 0.0);
  CHECK(switching_cost(Mode::Idle, Mode::Idle, bp) == bp.c_idle);
}

TEST_CASE("mode names round-trip") {
  for (Mode m : {Mode::Charge, Mode::Discharge, Mode::Idle}) CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS_AS((void)parse_mode("CHARGE"), mgrid::InputError);
}

TEST_CASE("estimate_lifespan: one shallow episode per day") {
  const auto c = default_blc_curve();
  std::vector<HourState> hours(24, {Mode::Idle, 0.9});
  hours[10] = {Mode::Discharge, 0.8};
  hours[11] = {Mode::Discharge, 0.7};
  for (std::size_t h = 12; h < 24; ++h) hours[h] = {Mode::Idle, 0.7};
  const auto one = estimate_lifespan(0.9, hours, c);
  REQUIRE(one.cycling);
  CHECK(one.episodes == 1);
  CHECK(one.mean_depth == Approx(0.2));
  CHECK(one.years == Approx(9000.0 / 365.0));

  hours[20] = {Mode::Discharge, 0.6};
  hours[21] = {Mode::Discharge, 0.5};
  for (std::size_t h = 22; h < 24; ++h) hours[h] = {Mode::Idle, 0.5};
  const auto two = estimate_lifespan(0.9, hours, c);
  CHECK(two.episodes == 2);
  CHECK(two.years == Approx(one.years / 2.0));
}

TEST_CASE("estimate_lifespan: no discharge means no cycling") {
  std::vector<HourState> hours(48, {Mode::Charge, 0.9});
  const auto est = estimate_lifespan(0.5, hours, default_blc_curve());
  CHECK_FALSE(est.cycling);
  CHECK(est.episodes == 0);
}

TEST_CASE("curve file round-trip and validation") {
  std::ostringstream out;
  write_blc_curve(out, default_blc_curve());
  std::istringstream in(out.str());
  const auto back = read_blc_curve(in);
  REQUIRE(back.points().size() == kBlcBreakpoints);
  for (std::size_t i = 0; i < kBlcBreakpoints; ++i) {
    CHECK(back.points()[i].x == default_blc_curve().points()[i].x);
    CHECK(back.points()[i].y == default_blc_curve().points()[i].y);
  }
  std::istringstream rising("dod,cycles\n0.1,100\n0.2,200\n0.3,300\n0.4,400\n0.5,500\n0.6,600\n0.7,700\n0.8,800\n0.9,900\n");
  CHECK_THROWS_AS((void)read_blc_curve(rising), mgrid::InputError);
  std::istringstream short_file("dod,cycles\n0.1,100\n0.2,50\n");
  CHECK_THROWS_AS((void)read_blc_curve(short_file), mgrid::InputError);
}

TEST_CASE("params validation") {
  BatteryParams bp;
  CHECK_NOTHROW(bp.validate());
  bp.soc_init = 0.95;
  CHECK_THROWS_AS(bp.validate(), mgrid::InputError);
  bp = {};
  bp.eta_ch = 0.0;
  CHECK_THROWS_AS(bp.validate(), mgrid::InputError);
  bp = {};
  bp.p_max = -1;
  CHECK_THROWS_AS(bp.validate(), mgrid::InputError);
}
