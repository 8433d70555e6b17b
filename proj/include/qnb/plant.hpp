#pragma once

// Interferometer plant: physical parameters, coupling factors, the closed-form
// lossless transfer blocks and the per-frequency solver for the lossy
// frequency-domain Langevin equations.

#include <string>
#include <vector>

#include "qnb/qalgebra.hpp"
#include "qnb/wiring.hpp"

namespace qnb {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;       // J s
inline constexpr double speed_of_light = 2.99792458e8; // m / s
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

struct PlantParams {
  double mass_kg = 200.0;
  double bandwidth_rad = 2.0 * constants::pi * 115.0;
  double coupling_rad = 0.0;
  double arm_length_m = 4000.0;
  double circ_power_w = 3.0e6;
  double wavelength_m = 2.0e-6;
  double mech_freq_rad = 0.0;
  double arm_damping_rad = 0.0;
  double hbar = constants::hbar;

  /// Detector-scale plant with the coupling derived from the circulating power.
  static PlantParams from_power(double arm_length_m, double mass_kg, double circ_power_w,
                                double wavelength_m, double bandwidth_rad);
  /// The 4 km, 200 kg, 3 MW, 2 um, 2 pi x 115 Hz reference detector.
  static PlantParams reference_detector();

  /// Normalized power J = 4 P_c omega_0 / (m L c).
  double normalized_power() const;
  /// Carrier angular frequency 2 pi c / lambda.
  double carrier_rad() const;

  void validate() const;
};

/// omega_a = sqrt(m J / 2 hbar). Throws ParameterError on nonpositive
/// arm length, mass or wavelength, or on negative power.
double derive_coupling(const PlantParams& params);

/// Arm damping gamma_2 = L_rt c / (4 L) for a round-trip loss given in ppm.
double arm_damping_from_loss(double arm_loss_ppm, double arm_length_m);

/// Copy of `params` with the arm damping set from the loss budget.
PlantParams with_arm_loss(const PlantParams& params, const LossBudgetSpec& losses);

struct CouplingFactors {
  double omega_rad = 0.0;
  double k_sm = 0.0;
  double k_pm = 0.0;
  Complex k_z{0.0, 0.0};
  double beta = 0.0;
  double x_sql_m = 0.0;
};

/// Speed-meter coupling, finite at DC.
double k_sm(const PlantParams& params, double omega_rad);
/// K_sm(0) = 16 hbar omega_a^2 / (m gamma^3) = sqrt(Gamma).
double k_sm_dc(const PlantParams& params);
/// sqrt(2 hbar / (m Omega^2)) in m / sqrt(Hz).
double x_sql(const PlantParams& params, double omega_rad);

/// All frequency-dependent scalars at one sideband frequency. Throws
/// DcSingularError at Omega = 0.
CouplingFactors coupling_factors(const PlantParams& params, double omega_rad);

struct GammaFigure {
  double gamma_val = 0.0;
  double omega_norm = 0.0;
};

/// Gamma = 256 hbar^2 omega_a^4 / (m^2 gamma^6); omega_norm = Omega / gamma.
GammaFigure gamma_figure(const PlantParams& params, double omega_rad = 0.0);

struct OnlineBlocks {
  ComplexMat t_v;  // Victor's input -> b_out
  ComplexMat t_z;  // unit-variance EPR residual -> b_out (scaled by sqrt2 e^-r)
  Vec2c t;         // signal, in units of x / x_SQL
};

struct OfflineBlocks {
  ComplexMat t_b;        // Bob's input -> b_out
  ComplexMat t_v_prime;  // Victor's input -> b_out
  Vec2c t_prime;
};

/// Closed-form lossless teleported-speed-meter blocks (free mass).
OnlineBlocks lossless_online_blocks(const PlantParams& params, double omega_rad);
/// Closed-form lossless blocks with the feedforward switched off.
OfflineBlocks lossless_offline_blocks(const PlantParams& params, double omega_rad);

/// Column layout of the plant's driving fields.
namespace source {
inline constexpr int victor = 0;        // v1, v2
inline constexpr int epr = 2;           // a1, a2, b1, b2
inline constexpr int arm_loss = 6;      // a'1, a'2, b'1, b'2
inline constexpr int input_loss = 10;   // b'_in,1, b'_in,2
inline constexpr int bell_loss = 12;    // alpha'_1, alpha'_2
inline constexpr int count = 14;
}  // namespace source

struct SourceGroup {
  std::string label;
  int first = 0;
  int size = 0;
};

/// Fixed grouping of the plant's source columns into independent inputs.
const std::vector<SourceGroup>& plant_source_groups();

/// Linear response of the plant at one frequency.
///
/// `output` maps every source column to Bob's cavity output b_out, `bell` to
/// the loss-mixed Bell outcomes (x_-, p_+). The signal vectors are per unit
/// x / x_SQL of the external displacement. The injection blocks give the
/// response to a unit field added to Bob's cavity input on top of the wiring,
/// which is what a change of feedforward gain perturbs.
struct PlantResponse {
  double omega_rad = 0.0;
  ComplexMat output;  // 2 x source::count
  ComplexMat bell;    // 2 x source::count
  Vec2c output_signal;
  Vec2c bell_signal;
  ComplexMat output_injection;  // 2 x 2
  ComplexMat bell_injection;    // 2 x 2

  /// Column block of `output` (or `bell`) for a named source group.
  ComplexMat output_block(const std::string& label) const;
  ComplexMat bell_block(const std::string& label) const;
};

/// Assemble and solve the 6-unknown linear system in (A1, A2, B1, B2, x, p)
/// at one frequency. Arm damping comes from `params.arm_damping_rad`; Bob's
/// input loss and the Bell-port detection loss come from `losses`. The
/// readout port's detection loss and amplifier are applied downstream.
PlantResponse solve_lossy_io(const PlantParams& params, double omega_rad, const WiringSpec& wiring,
                             const LossBudgetSpec& losses = {});

}  // namespace qnb
