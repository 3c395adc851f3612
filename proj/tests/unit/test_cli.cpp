#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgrid/metrics.hpp"
#include "mgrid/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(MGRID_TEST_WORKDIR) / "cli";

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  fs::create_directories(kWork);
  const auto log = kWork / "stdout.txt";
  const std::string cmd = std::string("\"") + MGRID_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream s;
  s << in.rdbuf();
  r.out = s.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("simulate writes three files and is repeatable") {
  const auto a = kWork / "run_a";
  const auto b = kWork / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(cli("simulate --synthetic --seed 7 -o \"" + a.string() + "\"").code == 0);
  REQUIRE(cli("simulate --synthetic --seed 7 -o \"" + b.string() + "\"").code == 0);
  for (const char* f : {"trace.csv", "ri_curve.csv", "summary.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  std::ifstream trace(a / "trace.csv");
  const auto records = mgrid::metrics::read_trace(trace);
  CHECK(records.size() == 72);
  std::ifstream curve(a / "ri_curve.csv");
  CHECK(mgrid::metrics::read_ri_curve(curve).size() == 72);

  // Loss totals agree with a re-summation of the written trace.
  double e = 0.0, r = 0.0;
  for (const auto& d : records) {
    e += d.essential_shed;
    r += d.regular_shed;
  }
  const auto j = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(j["essential_loss_kwh"].get<double>() == doctest::Approx(e).epsilon(1e-9));
  CHECK(j["regular_loss_kwh"].get<double>() == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("priority order is enforced at the flag layer") {
  const auto r = cli("simulate --synthetic --w-essential 0.1 --w-regular 0.9 -o \"" + (kWork / "bad").string() + "\"");
  CHECK(r.code == 1);
  CHECK(r.out.find("w_essential") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "bad" / "trace.csv"));
}

TEST_CASE("user errors exit 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("simulate").code == 1);
  CHECK(cli("simulate --w-t 2 --synthetic").code == 1);
  CHECK(cli("rmse /nonexistent/file.csv").code == 1);
  const auto bad = kWork / "bad.csv";
  std::ofstream(bad) << "hour,wind_kw\n0,1\n";
  CHECK(cli("rmse \"" + bad.string() + "\"").code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("generate then simulate") {
  const auto csv = kWork / "gen.csv";
  REQUIRE(cli("generate --seed 3 --hilp-start 28 --hilp-end 36 -o \"" + csv.string() + "\"").code == 0);
  const auto s = mgrid::scenario::load_scenario(csv.string());
  CHECK_NOTHROW(s.validate());
  for (std::size_t h = 0; h < s.hours(); ++h) CHECK(s.hilp[h] == (h >= 28 && h <= 36));
  const auto out = kWork / "gen_run";
  CHECK(cli("simulate \"" + csv.string() + "\" --stride day -o \"" + out.string() + "\"").code == 0);
  CHECK(fs::exists(out / "summary.json"));
}

TEST_CASE("rmse reports") {
  const auto calm = kWork / "calm.csv";
  REQUIRE(cli("generate --seed 3 --no-comm-loss -o \"" + calm.string() + "\"").code == 0);
  const auto r = cli("rmse \"" + calm.string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.out.find("no comm-loss window") != std::string::npos);

  const auto storm = kWork / "storm.csv";
  REQUIRE(cli("generate --seed 3 -o \"" + storm.string() + "\"").code == 0);
  const auto s = cli("rmse \"" + storm.string() + "\"");
  CHECK(s.code == 0);
  CHECK(s.out.find("essential") != std::string::npos);
}

TEST_CASE("dump-milp writes the chosen hour") {
  const auto lp = kWork / "h0.lp";
  fs::remove(lp);
  auto csv = kWork / "gen.csv";
  REQUIRE(cli("generate --seed 3 -o \"" + csv.string() + "\"").code == 0);
  CHECK(cli("simulate \"" + csv.string() + "\" --stride day --dump-milp \"" + lp.string() +
            "\" --dump-hour 24 -o \"" + (kWork / "dump_run").string() + "\"")
            .code == 0);
  const auto text = slurp(lp);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
}
