#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qnb/errors.hpp"
#include "qnb/scenario.hpp"

using namespace qnb;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<std::string> lines(const std::string& text) { return split(text, '\n'); }

ScenarioConfig small(const std::string& preset, int n = 25) {
  ScenarioConfig c = ScenarioConfig::preset_named(preset);
  c.n_points = n;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& out, const std::string& err) {
  const std::string cmd = std::string(QNB_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int rc = std::system(cmd.c_str());
  return rc;
}

}  // namespace

TEST_CASE("presets") {
  const ScenarioConfig a = ScenarioConfig::preset_named("reference-lossless");
  CHECK(a.losses.is_lossless());
  CHECK(std::isinf(a.squeeze_db));
  CHECK(a.n_points == 400);
  CHECK(a.f_min_hz == 1.0);
  CHECK(a.f_max_hz == 5000.0);
  const ScenarioConfig b = ScenarioConfig::preset_named("reference-lossy");
  CHECK(b.losses.eps_in == 0.01);
  CHECK(b.losses.eps_out == 0.01);
  CHECK(b.losses.arm_loss_ppm == 30.0);
  CHECK(b.squeeze_db == 15.0);
  CHECK(b.plant().coupling_rad == doctest::Approx(PlantParams::reference_detector().coupling_rad));
  CHECK_THROWS_AS(ScenarioConfig::preset_named("ligo"), ParameterError);
  CHECK(ScenarioConfig::preset_names().size() == 2);
}

TEST_CASE("config: serialize and parse round trip") {
  ScenarioConfig c = ScenarioConfig::preset_named("reference-lossy");
  c.mode = Mode::Offline;
  c.phi_rad = 0.1 + 0.2;  // not exactly representable in short decimal
  c.circ_power_w = 3e6 / 3.0;
  c.format = OutputFormat::Json;
  c.strain = true;
  c.optimize_gains = false;
  const ScenarioConfig d = ScenarioConfig::parse(c.serialize());
  CHECK(d.serialize() == c.serialize());
  CHECK(*d.phi_rad == *c.phi_rad);
  CHECK(d.circ_power_w == c.circ_power_w);
  CHECK(d.mode == Mode::Offline);
  CHECK(d.format == OutputFormat::Json);
  CHECK(d.strain);
  CHECK_FALSE(d.optimize_gains);
  const ScenarioConfig inf = ScenarioConfig::parse(ScenarioConfig{}.serialize());
  CHECK(std::isinf(inf.squeeze_db));
  CHECK_FALSE(inf.phi_rad.has_value());
}

TEST_CASE("config: comments, overrides and errors") {
  const ScenarioConfig c = ScenarioConfig::parse(
      "# scenario\n\npreset = reference-lossy\n  squeeze_db = 25 \nmode=offline\nphi = optimal\n");
  CHECK(c.squeeze_db == 25.0);
  CHECK(c.losses.eps_in == 0.01);
  CHECK(c.mode == Mode::Offline);
  CHECK_THROWS_AS(ScenarioConfig::parse("colour = blue\n"), ParameterError);
  CHECK_THROWS_AS(ScenarioConfig::parse("eps_in 0.1\n"), ParameterError);
  CHECK_THROWS_AS(ScenarioConfig::parse("eps_in = lots\n"), ParameterError);
  CHECK_THROWS_AS(ScenarioConfig::parse("n_points = 2.5\n"), ParameterError);
  CHECK_THROWS_AS(ScenarioConfig::parse("strain = maybe\n"), ParameterError);
  CHECK_THROWS_AS(ScenarioConfig::parse("mode = interferometer\n"), ParameterError);
  CHECK_THROWS_AS(ScenarioConfig::parse("format = xml\n"), ParameterError);

  ScenarioConfig bad;
  bad.f_min_hz = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = ScenarioConfig{};
  bad.n_points = 1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = ScenarioConfig{};
  bad.f_max_hz = 0.5;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = ScenarioConfig{};
  bad.losses.eps_out = 1.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = ScenarioConfig{};
  bad.squeeze_db = -2.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("curve CSV layout") {
  const CurveOutput out = run_curve(small("reference-lossy"), 2);
  const auto ls = lines(out.text);
  REQUIRE(ls.size() == 26);
  const auto head = split(ls[0], ',');
  CHECK(head.front() == "freq_hz");
  CHECK(head[1] == "asd_total");
  CHECK(head.back() == "sql_asd");
  CHECK(std::find(head.begin(), head.end(), "asd_epr") != head.end());
  CHECK(std::find(head.begin(), head.end(), "asd_readout_loss") != head.end());
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto cells = split(ls[i], ',');
    REQUIRE(cells.size() == head.size());
    double sum = 0.0;
    for (std::size_t j = 2; j + 1 < cells.size(); ++j) sum += std::pow(std::stod(cells[j]), 2);
    CHECK(std::sqrt(sum) == doctest::Approx(std::stod(cells[1])).epsilon(1e-10));
    // Full precision: the printed value parses back to the computed double.
    CHECK(std::stod(cells[1]) == std::sqrt(out.curve.total_psd_m2_per_hz[i - 1]));
  }
}

TEST_CASE("curve: lossless online minimum is near 1 / (2 sqrt Gamma)") {
  ScenarioConfig c = ScenarioConfig::preset_named("reference-lossless");
  const SensitivityCurve s = compute_curve(c, 2);
  const PlantParams p = c.plant();
  double best = 1e300;
  for (std::size_t i = 0; i < s.freqs_hz.size(); ++i) {
    const double x = x_sql(p, 2.0 * constants::pi * s.freqs_hz[i]);
    best = std::min(best, s.total_psd_m2_per_hz[i] / (x * x));
  }
  CHECK(best == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("curve: SQL mode, strain units and JSON") {
  ScenarioConfig c = small("reference-lossless", 5);
  c.mode = Mode::Sql;
  const auto ls = lines(run_curve(c, 1).text);
  CHECK(ls[0] == "freq_hz,asd_total,sql_asd");
  const auto row = split(ls[3], ',');
  CHECK(row[1] == row[2]);

  ScenarioConfig m = small("reference-lossless", 5);
  ScenarioConfig h = m;
  h.strain = true;
  const auto lm = lines(run_curve(m, 1).text);
  const auto lh = lines(run_curve(h, 1).text);
  CHECK(std::stod(split(lh[2], ',')[1]) ==
        doctest::Approx(std::stod(split(lm[2], ',')[1]) / 4000.0).epsilon(1e-15));

  ScenarioConfig j = small("reference-lossy", 7);
  j.mode = Mode::Offline;
  j.format = OutputFormat::Json;
  const auto doc = nlohmann::json::parse(run_curve(j, 1).text);
  CHECK(doc["mode"] == "offline");
  CHECK(doc["freq_hz"].size() == 7);
  CHECK(doc["asd_total"].size() == 7);
  CHECK(doc["sql_asd"].size() == 7);
  CHECK(doc["asd_contributions"].contains("epr"));
  CHECK(doc["phi_optimal"] == true);
}

TEST_CASE("property: CSV is bit-identical across config round trips and thread counts") {
  ScenarioConfig c = small("reference-lossy", 60);
  c.mode = Mode::Online;
  const std::string a = run_curve(c, 1).text;
  const std::string b = run_curve(ScenarioConfig::parse(c.serialize()), 5).text;
  const std::string d = run_curve(ScenarioConfig::parse(ScenarioConfig::parse(c.serialize()).serialize()), 3).text;
  CHECK(a == b);
  CHECK(a == d);
}

TEST_CASE("compare") {
  SUBCASE("identical configs give unit ratio") {
    const CompareOutput o = run_compare(small("reference-lossy"), small("reference-lossy"), 2);
    for (const auto& r : o.rows) CHECK(r.ratio == 1.0);
    CHECK(o.at_8hz.ratio == 1.0);
    const auto ls = lines(o.text);
    CHECK(ls.front() == "freq_hz,asd_a,asd_b,ratio");
    CHECK(ls.back().rfind("summary_8hz,", 0) == 0);
  }
  SUBCASE("position meter over speed meter at 8 Hz") {
    ScenarioConfig pm = small("reference-lossless");
    pm.mode = Mode::PositionMeter;
    const CompareOutput o = run_compare(pm, small("reference-lossless"), 2);
    CHECK(o.at_8hz.ratio >= 5.0);
    CHECK(o.at_8hz.freq_hz == 8.0);
  }
  SUBCASE("amplifier off over on at 10 Hz") {
    ScenarioConfig off = small("reference-lossy");
    off.f_min_hz = 10.0;
    off.f_max_hz = 20.0;
    ScenarioConfig on = off;
    on.losses.amplifier_gain_db = 20.0;
    CHECK(run_compare(off, on, 2).rows.front().ratio > 1.0);
  }
  SUBCASE("grids must match") {
    ScenarioConfig b = small("reference-lossy", 26);
    CHECK_THROWS_AS(run_compare(small("reference-lossy"), b, 1), ParameterError);
  }
}

TEST_CASE("figures of merit") {
  const auto doc = nlohmann::json::parse(run_figures_of_merit(ScenarioConfig{}));
  CHECK(doc["gamma"].get<double>() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(doc["rho_squared"].get<double>() == doctest::Approx(2.0).epsilon(0.01));
  CHECK(doc["phi_opt_rad"].get<double>() == doctest::Approx(0.785).epsilon(0.002));
  CHECK(doc["beats_sql"].get<bool>());

  ScenarioConfig weak;
  weak.circ_power_w *= std::sqrt(0.24 / figures_of_merit(weak).gamma);
  CHECK(figures_of_merit(weak).gamma == doctest::Approx(0.24).epsilon(1e-12));
  CHECK_FALSE(figures_of_merit(weak).beats_sql);

  ScenarioConfig dark;
  dark.circ_power_w = 0.0;
  const FiguresOfMerit f = figures_of_merit(dark);
  CHECK(f.gamma == 0.0);
  CHECK_FALSE(f.beats_sql);
}

TEST_CASE("thread count from the environment") {
  ::setenv("QNB_THREADS", "3", 1);
  CHECK(threads_from_env() == 3u);
  ::setenv("QNB_THREADS", "0", 1);
  CHECK_THROWS_AS(threads_from_env(), ParameterError);
  ::unsetenv("QNB_THREADS");
  CHECK(threads_from_env() >= 1u);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(400.0) == "400");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("cli: curve round trip through a saved config is bit-identical") {
  const std::string dir = QNB_TEST_TMP;
  REQUIRE(run_cli("curve --preset reference-lossy --mode offline --points 40 --save-config " + dir +
                      "/rt.cfg --out " + dir + "/rt1.csv",
                  dir + "/o", dir + "/e") == 0);
  REQUIRE(run_cli("curve --config " + dir + "/rt.cfg --out " + dir + "/rt2.csv", dir + "/o", dir + "/e") == 0);
  const std::string a = slurp(dir + "/rt1.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(dir + "/rt2.csv"));
  CHECK(a == run_curve(ScenarioConfig::parse(slurp(dir + "/rt.cfg")), 1).text);
}

TEST_CASE("cli: fom and errors") {
  const std::string dir = QNB_TEST_TMP;
  REQUIRE(run_cli("fom", dir + "/fom.json", dir + "/e") == 0);
  CHECK(nlohmann::json::parse(slurp(dir + "/fom.json"))["beats_sql"].get<bool>());

  CHECK(run_cli("curve --eps-in 1.5", dir + "/o", dir + "/e") != 0);
  const auto err = lines(slurp(dir + "/e"));
  REQUIRE(err.size() == 1);
  CHECK(err[0].rfind("error: parameter: ", 0) == 0);

  CHECK(run_cli("curve --mode warp", dir + "/o", dir + "/e") != 0);
  CHECK(slurp(dir + "/e").rfind("error: parameter: ", 0) == 0);
  CHECK(run_cli("curve --bogus-flag 1", dir + "/o", dir + "/e") != 0);
  CHECK(slurp(dir + "/e").rfind("error: usage: ", 0) == 0);
  CHECK(run_cli("", dir + "/o", dir + "/e") != 0);
  CHECK(run_cli("compare --preset reference-lossy --points 10 --b-amp-gain-db 20", dir + "/o", dir + "/e") == 0);
  CHECK(lines(slurp(dir + "/o")).size() == 12);
}
