// Command-line front end: curve, compare and fom subcommands.

#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qnb/errors.hpp"
#include "qnb/scenario.hpp"

namespace {

// Scenario-level flags kept as text and applied through ScenarioConfig::set,
// so flags and config files share one parser.
struct ScenarioFlags {
  std::string preset;
  std::string config_path;
  std::deque<std::pair<std::string, std::optional<std::string>>> values;  // stable refs
  bool strain = false;
  bool fixed_gains = false;

  std::optional<std::string>& slot(const std::string& key) {
    values.emplace_back(key, std::nullopt);
    return values.back().second;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qnb::ParameterError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qnb::ParameterError("cannot write '" + path + "'");
  out << text;
}

// Registers the scenario flags; `prefix` is "" for the primary scenario and
// "b-" for the second scenario of `compare`.
void add_scenario_flags(CLI::App* app, ScenarioFlags& f, const std::string& prefix, bool with_grid) {
  const std::string p = "--" + prefix;
  app->add_option(p + "preset", f.preset, "reference-lossless | reference-lossy");
  app->add_option(p + "config", f.config_path, "key = value file applied over the preset");
  app->add_option(p + "mode", f.slot("mode"), "online | offline | pm | sql");
  app->add_option(p + "phi", f.slot("phi"), "homodyne angle in rad, or 'optimal'");
  app->add_option(p + "squeeze-db", f.slot("squeeze_db"), "generated squeezing in dB, 'inf' for ideal");
  app->add_option(p + "eps-in", f.slot("eps_in"), "input power loss");
  app->add_option(p + "eps-out", f.slot("eps_out"), "detection power loss");
  app->add_option(p + "arm-loss-ppm", f.slot("arm_loss_ppm"), "round-trip arm loss in ppm");
  app->add_option(p + "amp-gain-db", f.slot("amp_gain_db"), "readout amplifier gain in dB");
  app->add_option(p + "power-w", f.slot("circ_power_w"), "circulating power in W");
  app->add_option(p + "mass-kg", f.slot("mass_kg"), "mirror mass in kg");
  app->add_option(p + "arm-length-m", f.slot("arm_length_m"), "arm length in m");
  app->add_option(p + "bandwidth-hz", f.slot("bandwidth_hz"), "cavity half-bandwidth in Hz");
  app->add_flag(p + "fixed-gains", f.fixed_gains, "online: keep the nominal feedforward gains");
  if (with_grid) {
    app->add_option("--fmin", f.slot("f_min_hz"), "lowest frequency in Hz");
    app->add_option("--fmax", f.slot("f_max_hz"), "highest frequency in Hz");
    app->add_option("--points", f.slot("n_points"), "number of log-spaced points");
    app->add_option("--format", f.slot("format"), "csv | json");
    app->add_flag("--strain", f.strain, "divide amplitudes by the arm length");
  }
}

qnb::ScenarioConfig build_config(const ScenarioFlags& f, const qnb::ScenarioConfig& base) {
  qnb::ScenarioConfig c = f.preset.empty() ? base : qnb::ScenarioConfig::preset_named(f.preset);
  if (!f.config_path.empty()) c = qnb::ScenarioConfig::parse(read_file(f.config_path), c);
  for (const auto& [key, value] : f.values) {
    if (value) c.set(key, *value);
  }
  if (f.strain) c.strain = true;
  if (f.fixed_gains) c.optimize_gains = false;
  return c;
}

int fail(const std::string& kind, const std::string& what) {
  std::string msg = what;
  for (char& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "error: " << kind << ": " << msg << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-noise budget of the teleportation speed meter"};
  app.require_subcommand(1);

  ScenarioFlags curve_flags;
  std::string curve_out, curve_save;
  CLI::App* curve = app.add_subcommand("curve", "sensitivity curve as CSV or JSON");
  add_scenario_flags(curve, curve_flags, "", true);
  curve->add_option("--out", curve_out, "output path (default stdout)");
  curve->add_option("--save-config", curve_save, "write the resolved config to this path");

  ScenarioFlags cmp_a, cmp_b;
  std::string cmp_out;
  CLI::App* compare = app.add_subcommand("compare", "amplitude ratio a / b per frequency");
  add_scenario_flags(compare, cmp_a, "", true);
  add_scenario_flags(compare, cmp_b, "b-", false);
  compare->add_option("--out", cmp_out, "output path (default stdout)");

  ScenarioFlags fom_flags;
  std::string fom_out;
  CLI::App* fom = app.add_subcommand("fom", "figures of merit as JSON");
  add_scenario_flags(fom, fom_flags, "", false);
  fom->add_option("--out", fom_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    const qnb::ScenarioConfig defaults = qnb::ScenarioConfig::preset_named("reference-lossless");
    if (*curve) {
      const qnb::ScenarioConfig c = build_config(curve_flags, defaults);
      c.validate();
      if (!curve_save.empty()) write_text(curve_save, c.serialize());
      write_text(curve_out, qnb::run_curve(c).text);
    } else if (*compare) {
      const qnb::ScenarioConfig a = build_config(cmp_a, defaults);
      qnb::ScenarioConfig b = build_config(cmp_b, a);
      // The grid and output options always follow the first scenario.
      b.f_min_hz = a.f_min_hz;
      b.f_max_hz = a.f_max_hz;
      b.n_points = a.n_points;
      b.strain = a.strain;
      b.format = a.format;
      write_text(cmp_out, qnb::run_compare(a, b).text);
    } else if (*fom) {
      write_text(fom_out, qnb::run_figures_of_merit(build_config(fom_flags, defaults)));
    }
  } catch (const qnb::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
