#include "qnb/scenario.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qnb/errors.hpp"

namespace qnb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ParameterError("'" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ParameterError("'" + key + "' expects an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ParameterError("'" + key + "' expects true or false, got '" + text + "'");
}

SensitivityCurve compute_on(const ScenarioConfig& config, const std::vector<double>& grid,
                            unsigned threads) {
  config.validate();
  SweepOptions opts;
  opts.threads = threads == 0 ? threads_from_env() : threads;
  opts.optimize_gains = config.optimize_gains;
  const PlantParams p = config.plant();
  switch (config.mode) {
    case Mode::Online:
      return online_sensitivity(p, config.losses, config.epr(), config.homodyne(), grid, opts);
    case Mode::Offline:
      return offline_sensitivity(p, config.losses, config.epr(), config.homodyne(), grid, opts);
    case Mode::PositionMeter:
      if (config.losses.is_lossless() && config.losses.amplifier_gain_db == 0.0) {
        return position_meter_sensitivity(p, grid);
      }
      return position_meter_sensitivity(p, config.losses, grid, opts);
    case Mode::Sql: {
      SensitivityCurve c = sql_curve(p, grid);
      c.per_contribution.clear();
      return c;
    }
  }
  throw ContractError("compute_curve: unknown mode");
}

double amplitude(double psd, double scale) { return std::sqrt(psd) * scale; }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ParameterError("unknown format '" + s + "' (expected csv|json)");
}

ScenarioConfig ScenarioConfig::preset_named(const std::string& name) {
  ScenarioConfig c;
  c.preset = name;
  if (name == "reference-lossless") return c;
  if (name == "reference-lossy") {
    c.losses.eps_in = 0.01;
    c.losses.eps_out = 0.01;
    c.losses.arm_loss_ppm = 30.0;
    c.squeeze_db = 15.0;
    return c;
  }
  throw ParameterError("unknown preset '" + name + "' (expected reference-lossless|reference-lossy)");
}

std::vector<std::string> ScenarioConfig::preset_names() { return {"reference-lossless", "reference-lossy"}; }

PlantParams ScenarioConfig::plant() const {
  PlantParams p = PlantParams::from_power(arm_length_m, mass_kg, circ_power_w, wavelength_m,
                                          2.0 * constants::pi * bandwidth_hz);
  p.mech_freq_rad = 2.0 * constants::pi * mech_freq_hz;
  p.validate();
  return p;
}

EprState ScenarioConfig::epr() const { return EprState::from_db(squeeze_db); }

HomodyneChoice ScenarioConfig::homodyne() const {
  return phi_rad ? HomodyneChoice::fixed(*phi_rad) : HomodyneChoice::dc_optimal();
}

std::vector<double> ScenarioConfig::grid_hz() const {
  return log_spaced_grid(f_min_hz, f_max_hz, n_points);
}

void ScenarioConfig::validate() const {
  if (!(f_min_hz > 0.0) || !std::isfinite(f_min_hz)) throw ParameterError("f_min_hz must be > 0");
  if (!(f_max_hz > f_min_hz) || !std::isfinite(f_max_hz)) {
    throw ParameterError("f_max_hz must be finite and above f_min_hz");
  }
  if (n_points < 2) throw ParameterError("n_points must be >= 2");
  if (phi_rad && !std::isfinite(*phi_rad)) throw ParameterError("phi must be finite or 'optimal'");
  if (!(mech_freq_hz >= 0.0) || !std::isfinite(mech_freq_hz)) {
    throw ParameterError("mech_freq_hz must be nonnegative");
  }
  losses.validate();
  (void)plant();
  (void)epr();
}

std::string ScenarioConfig::serialize() const {
  std::ostringstream os;
  auto line = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  line("preset", preset);
  line("arm_length_m", format_double(arm_length_m));
  line("mass_kg", format_double(mass_kg));
  line("circ_power_w", format_double(circ_power_w));
  line("wavelength_m", format_double(wavelength_m));
  line("bandwidth_hz", format_double(bandwidth_hz));
  line("mech_freq_hz", format_double(mech_freq_hz));
  line("eps_in", format_double(losses.eps_in));
  line("eps_out", format_double(losses.eps_out));
  line("arm_loss_ppm", format_double(losses.arm_loss_ppm));
  line("amp_gain_db", format_double(losses.amplifier_gain_db));
  line("squeeze_db", format_double(squeeze_db));
  line("mode", to_string(mode));
  line("phi", phi_rad ? format_double(*phi_rad) : "optimal");
  line("optimize_gains", optimize_gains ? "true" : "false");
  line("f_min_hz", format_double(f_min_hz));
  line("f_max_hz", format_double(f_max_hz));
  line("n_points", std::to_string(n_points));
  line("format", to_string(format));
  line("strain", strain ? "true" : "false");
  return os.str();
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "preset") {
    *this = preset_named(v);
  } else if (key == "arm_length_m") {
    arm_length_m = parse_double(key, v);
  } else if (key == "mass_kg") {
    mass_kg = parse_double(key, v);
  } else if (key == "circ_power_w") {
    circ_power_w = parse_double(key, v);
  } else if (key == "wavelength_m") {
    wavelength_m = parse_double(key, v);
  } else if (key == "bandwidth_hz") {
    bandwidth_hz = parse_double(key, v);
  } else if (key == "mech_freq_hz") {
    mech_freq_hz = parse_double(key, v);
  } else if (key == "eps_in") {
    losses.eps_in = parse_double(key, v);
  } else if (key == "eps_out") {
    losses.eps_out = parse_double(key, v);
  } else if (key == "arm_loss_ppm") {
    losses.arm_loss_ppm = parse_double(key, v);
  } else if (key == "amp_gain_db") {
    losses.amplifier_gain_db = parse_double(key, v);
  } else if (key == "squeeze_db") {
    squeeze_db = parse_double(key, v);
  } else if (key == "mode") {
    mode = mode_from_string(v);
  } else if (key == "phi") {
    if (v == "optimal") {
      phi_rad.reset();
    } else {
      phi_rad = parse_double(key, v);
    }
  } else if (key == "optimize_gains") {
    optimize_gains = parse_bool(key, v);
  } else if (key == "f_min_hz") {
    f_min_hz = parse_double(key, v);
  } else if (key == "f_max_hz") {
    f_max_hz = parse_double(key, v);
  } else if (key == "n_points") {
    n_points = parse_int(key, v);
  } else if (key == "format") {
    format = format_from_string(v);
  } else if (key == "strain") {
    strain = parse_bool(key, v);
  } else {
    throw ParameterError("unknown config key '" + key + "'");
  }
}

ScenarioConfig ScenarioConfig::parse(const std::string& text, const ScenarioConfig& base) {
  ScenarioConfig c = base;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    c.set(trim(s.substr(0, eq)), s.substr(eq + 1));
  }
  return c;
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) { return parse(text, ScenarioConfig{}); }

unsigned threads_from_env() {
  if (const char* env = std::getenv("QNB_THREADS")) {
    const int n = parse_int("QNB_THREADS", env);
    if (n < 1) throw ParameterError("QNB_THREADS must be >= 1");
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SensitivityCurve compute_curve(const ScenarioConfig& config, unsigned threads) {
  config.validate();
  return compute_on(config, config.grid_hz(), threads);
}

std::string curve_to_csv(const SensitivityCurve& curve, const ScenarioConfig& config) {
  const PlantParams p = config.plant();
  const double scale = config.strain ? 1.0 / config.arm_length_m : 1.0;
  std::ostringstream os;
  os << "freq_hz,asd_total";
  for (const auto& [label, _] : curve.per_contribution) os << ",asd_" << label;
  os << ",sql_asd\n";
  for (std::size_t i = 0; i < curve.freqs_hz.size(); ++i) {
    const double f = curve.freqs_hz[i];
    os << format_double(f) << ',' << format_double(amplitude(curve.total_psd_m2_per_hz[i], scale));
    for (const auto& [_, v] : curve.per_contribution) os << ',' << format_double(amplitude(v[i], scale));
    os << ',' << format_double(x_sql(p, 2.0 * constants::pi * f) * scale) << '\n';
  }
  return os.str();
}

std::string curve_to_json(const SensitivityCurve& curve, const ScenarioConfig& config) {
  const PlantParams p = config.plant();
  const double scale = config.strain ? 1.0 / config.arm_length_m : 1.0;
  nlohmann::ordered_json j;
  j["mode"] = to_string(curve.mode);
  j["phi_rad"] = curve.phi_used;
  j["phi_optimal"] = !curve.homodyne_phi.has_value() && curve.mode != Mode::Sql &&
                     curve.mode != Mode::PositionMeter;
  j["units"] = config.strain ? "1/sqrt(Hz)" : "m/sqrt(Hz)";
  j["freq_hz"] = curve.freqs_hz;
  std::vector<double> total, sql;
  for (std::size_t i = 0; i < curve.freqs_hz.size(); ++i) {
    total.push_back(amplitude(curve.total_psd_m2_per_hz[i], scale));
    sql.push_back(x_sql(p, 2.0 * constants::pi * curve.freqs_hz[i]) * scale);
  }
  j["asd_total"] = total;
  nlohmann::ordered_json parts = nlohmann::ordered_json::object();
  for (const auto& [label, v] : curve.per_contribution) {
    std::vector<double> a;
    for (double x : v) a.push_back(amplitude(x, scale));
    parts[label] = a;
  }
  j["asd_contributions"] = parts;
  j["sql_asd"] = sql;
  return j.dump(2) + "\n";
}

CurveOutput run_curve(const ScenarioConfig& config, unsigned threads) {
  CurveOutput out;
  out.curve = compute_curve(config, threads);
  out.text = config.format == OutputFormat::Csv ? curve_to_csv(out.curve, config)
                                                : curve_to_json(out.curve, config);
  return out;
}

CompareOutput run_compare(const ScenarioConfig& a, const ScenarioConfig& b, unsigned threads) {
  a.validate();
  b.validate();
  const std::vector<double> grid = a.grid_hz();
  if (grid != b.grid_hz()) throw ParameterError("compare needs both configs on the same grid");
  const double sa = a.strain ? 1.0 / a.arm_length_m : 1.0;
  const double sb = b.strain ? 1.0 / b.arm_length_m : 1.0;

  auto rows_for = [&](const std::vector<double>& g) {
    const SensitivityCurve ca = compute_on(a, g, threads);
    const SensitivityCurve cb = compute_on(b, g, threads);
    std::vector<CompareRow> rows;
    for (std::size_t i = 0; i < g.size(); ++i) {
      CompareRow r;
      r.freq_hz = g[i];
      r.asd_a = amplitude(ca.total_psd_m2_per_hz[i], sa);
      r.asd_b = amplitude(cb.total_psd_m2_per_hz[i], sb);
      r.ratio = r.asd_a / r.asd_b;
      rows.push_back(r);
    }
    return rows;
  };

  CompareOutput out;
  out.rows = rows_for(grid);
  out.at_8hz = rows_for({8.0}).front();

  if (a.format == OutputFormat::Json) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : out.rows) {
      rows.push_back({{"freq_hz", r.freq_hz}, {"asd_a", r.asd_a}, {"asd_b", r.asd_b}, {"ratio", r.ratio}});
    }
    j["rows"] = rows;
    j["summary_8hz"] = {{"freq_hz", 8.0}, {"asd_a", out.at_8hz.asd_a}, {"asd_b", out.at_8hz.asd_b},
                        {"ratio", out.at_8hz.ratio}};
    out.text = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << "freq_hz,asd_a,asd_b,ratio\n";
    for (const auto& r : out.rows) {
      os << format_double(r.freq_hz) << ',' << format_double(r.asd_a) << ',' << format_double(r.asd_b)
         << ',' << format_double(r.ratio) << '\n';
    }
    os << "summary_8hz," << format_double(out.at_8hz.asd_a) << ',' << format_double(out.at_8hz.asd_b)
       << ',' << format_double(out.at_8hz.ratio) << '\n';
    out.text = os.str();
  }
  return out;
}

FiguresOfMerit figures_of_merit(const ScenarioConfig& config) {
  config.validate();
  const PlantParams p = config.plant();
  FiguresOfMerit f;
  f.gamma = gamma_figure(p).gamma_val;
  f.rho_squared = rho_squared(f.gamma);
  f.phi_opt_rad = optimal_homodyne_angle(p);
  f.beats_sql = beats_sql(f.gamma);
  return f;
}

std::string run_figures_of_merit(const ScenarioConfig& config) {
  const FiguresOfMerit f = figures_of_merit(config);
  nlohmann::ordered_json j;
  j["gamma"] = f.gamma;
  j["rho_squared"] = f.rho_squared;
  j["phi_opt_rad"] = f.phi_opt_rad;
  j["beats_sql"] = f.beats_sql;
  return j.dump(2) + "\n";
}

}  // namespace qnb
