#pragma once

// End-to-end displacement sensitivities and figures of merit.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnb/plant.hpp"
#include "qnb/teleport.hpp"
#include "qnb/wiring.hpp"

namespace qnb {

/// Ascending log-spaced grid in Hz, endpoints included.
std::vector<double> log_spaced_grid(double f_min_hz, double f_max_hz, int n_points);

/// Fixed homodyne angle, or the DC optimum arccot K_sm(0) of the plant.
struct HomodyneChoice {
  bool optimal = false;
  double phi = constants::pi / 2.0;

  static HomodyneChoice fixed(double phi_rad) { return {false, phi_rad}; }
  static HomodyneChoice dc_optimal() { return {true, 0.0}; }
  double resolve(const PlantParams& params) const;
};

/// One grid point of a sensitivity evaluation.
struct PointResult {
  double omega_rad = 0.0;
  double noise_power = 0.0;   // vacuum units, after conditioning
  double signal_power = 0.0;  // |signal|^2 per (x / x_SQL)^2
  double psd_m2_per_hz = 0.0;
  std::vector<std::pair<std::string, double>> contributions;  // m^2 / Hz
  FilterPair filters = FilterPair::Zero();  // offline Wiener filters on (x_-, p_+)
  FilterPair gains = FilterPair::Zero();    // online feedforward gains actually used
};

/// Readout chain of one frequency: plant solve, readout amplifier, detection
/// loss, homodyne projection and (offline) conditioning on the Bell outcomes.
/// Arm damping is taken from `losses.arm_loss_ppm`.
PointResult evaluate_point(const PlantParams& params, const LossBudgetSpec& losses,
                           const EprState& epr, const WiringSpec& wiring, double phi,
                           double omega_rad);

struct SensitivityCurve {
  std::vector<double> freqs_hz;
  std::vector<double> total_psd_m2_per_hz;
  std::vector<std::pair<std::string, std::vector<double>>> per_contribution;
  Mode mode = Mode::Online;
  std::optional<double> homodyne_phi;  // nullopt for the DC-optimal angle
  double phi_used = 0.0;

  const std::vector<double>& contribution(const std::string& label) const;
};

struct SweepOptions {
  bool optimize_gains = false;  // online only
  FilterPair gains{FilterPair::Constant(Complex(1.4142135623730951, 0.0))};
  unsigned threads = 1;
};

SensitivityCurve online_sensitivity(const PlantParams& params, const LossBudgetSpec& losses,
                                    const EprState& epr, const HomodyneChoice& phi,
                                    const std::vector<double>& grid_hz,
                                    const SweepOptions& opts = {});

SensitivityCurve offline_sensitivity(const PlantParams& params, const LossBudgetSpec& losses,
                                     const EprState& epr, const HomodyneChoice& phi,
                                     const std::vector<double>& grid_hz,
                                     const SweepOptions& opts = {});

/// Conventional position meter at phi = pi/2, no squeezing, no losses:
/// (x_SQL^2 / 2)(1 / K_pm + K_pm).
SensitivityCurve position_meter_sensitivity(const PlantParams& params,
                                            const std::vector<double>& grid_hz);

/// Solver-based position meter at phi = pi/2 with the given losses and an
/// unsqueezed input.
SensitivityCurve position_meter_sensitivity(const PlantParams& params, const LossBudgetSpec& losses,
                                            const std::vector<double>& grid_hz,
                                            const SweepOptions& opts = {});

/// x_SQL^2 = 2 hbar / (m Omega^2).
SensitivityCurve sql_curve(const PlantParams& params, const std::vector<double>& grid_hz);

/// arccot K_sm(0) = arccot sqrt(Gamma), in (0, pi/2].
double optimal_homodyne_angle(const PlantParams& params);

/// Speed-meter over position-meter enhancement as a rational function of
/// omega = Omega / gamma and Gamma.
double enhancement_ratio(double omega_norm, double gamma_val);

/// Sub-SQL figure rho^2 = 2 sqrt(Gamma).
double rho_squared(double gamma_val);
/// The fixed-angle speed meter beats the SQL iff Gamma > 1/4.
bool beats_sql(double gamma_val);

}  // namespace qnb
