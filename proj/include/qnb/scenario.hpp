#pragma once

// Scenario presets, flat key = value configuration, sweeps and CSV / JSON
// export.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qnb/budget.hpp"

namespace qnb {

enum class OutputFormat { Csv, Json };

std::string to_string(OutputFormat f);
OutputFormat format_from_string(const std::string& s);

struct ScenarioConfig {
  std::string preset = "reference-lossless";

  // Plant. The coupling is derived from the circulating power.
  double arm_length_m = 4000.0;
  double mass_kg = 200.0;
  double circ_power_w = 3.0e6;
  double wavelength_m = 2.0e-6;
  double bandwidth_hz = 115.0;
  double mech_freq_hz = 0.0;

  LossBudgetSpec losses;
  /// Generated squeezing; +inf is the ideal EPR resource.
  double squeeze_db = std::numeric_limits<double>::infinity();

  Mode mode = Mode::Online;
  std::optional<double> phi_rad;  // nullopt selects the DC-optimal angle
  bool optimize_gains = true;      // online only

  double f_min_hz = 1.0;
  double f_max_hz = 5000.0;
  int n_points = 400;

  OutputFormat format = OutputFormat::Csv;
  bool strain = false;  // amplitudes divided by the arm length

  /// Known presets: "reference-lossless", "reference-lossy".
  static ScenarioConfig preset_named(const std::string& name);
  static std::vector<std::string> preset_names();

  PlantParams plant() const;
  EprState epr() const;
  HomodyneChoice homodyne() const;
  std::vector<double> grid_hz() const;

  /// Throws ParameterError on the first violated invariant.
  void validate() const;

  /// One `key = value` line per field, doubles at 17 significant digits.
  std::string serialize() const;
  /// Applies `key = value` lines on top of `base`. Blank lines and lines
  /// starting with '#' are ignored; unknown keys are rejected.
  static ScenarioConfig parse(const std::string& text, const ScenarioConfig& base);
  static ScenarioConfig parse(const std::string& text);
  /// Sets a single field from its textual value.
  void set(const std::string& key, const std::string& value);
};

/// Sweep of the configured mode. Threads come from QNB_THREADS when
/// `threads` is 0.
SensitivityCurve compute_curve(const ScenarioConfig& config, unsigned threads = 0);

struct CurveOutput {
  SensitivityCurve curve;
  std::string text;
};

/// CSV columns: freq_hz, asd_total, asd_<label>..., sql_asd.
CurveOutput run_curve(const ScenarioConfig& config, unsigned threads = 0);

std::string curve_to_csv(const SensitivityCurve& curve, const ScenarioConfig& config);
std::string curve_to_json(const SensitivityCurve& curve, const ScenarioConfig& config);

struct CompareRow {
  double freq_hz = 0.0;
  double asd_a = 0.0;
  double asd_b = 0.0;
  double ratio = 0.0;  // asd_a / asd_b
};

struct CompareOutput {
  std::vector<CompareRow> rows;
  CompareRow at_8hz;
  std::string text;
};

/// Per-frequency amplitude ratio a / b on the grid of `a`, plus a summary row
/// evaluated directly at 8 Hz. Both configs must share the grid.
CompareOutput run_compare(const ScenarioConfig& a, const ScenarioConfig& b, unsigned threads = 0);

struct FiguresOfMerit {
  double gamma = 0.0;
  double rho_squared = 0.0;
  double phi_opt_rad = 0.0;
  bool beats_sql = false;
};

FiguresOfMerit figures_of_merit(const ScenarioConfig& config);
/// {"gamma", "rho_squared", "phi_opt_rad", "beats_sql"}.
std::string run_figures_of_merit(const ScenarioConfig& config);

/// Thread count from QNB_THREADS, else the hardware concurrency.
unsigned threads_from_env();

/// %.17g, with "inf" / "-inf" / "nan" spelled out.
std::string format_double(double v);

}  // namespace qnb
