#include "qnb/plant.hpp"

#include <cmath>

#include "qnb/errors.hpp"

namespace qnb {

namespace {

using namespace std::complex_literals;

constexpr double kSqrt2 = 1.4142135623730951;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(name) + " must be positive and finite");
  }
}

void require_omega(double omega_rad) {
  if (!std::isfinite(omega_rad) || omega_rad < 0.0) {
    throw ParameterError("sideband frequency must be finite and nonnegative");
  }
  if (omega_rad == 0.0) throw DcSingularError("K_pm, K_z and x_SQL are singular at Omega = 0");
}

// Indices of the unknowns of the linear system.
enum Unknown : int { kA1 = 0, kA2, kB1, kB2, kXi, kPi, kUnknowns };

// Extended source columns: the physical sources, the signal, two injections.
constexpr int kSignalCol = source::count;
constexpr int kInjectCol = source::count + 1;
constexpr int kColumns = source::count + 3;

using SysMat = Eigen::Matrix<Complex, kUnknowns, kUnknowns>;
using SrcMat = Eigen::Matrix<Complex, kUnknowns, kColumns>;
using URow = Eigen::Matrix<Complex, 1, kUnknowns>;
using SRow = Eigen::Matrix<Complex, 1, kColumns>;

}  // namespace

PlantParams PlantParams::from_power(double arm_length_m, double mass_kg, double circ_power_w,
                                    double wavelength_m, double bandwidth_rad) {
  PlantParams p;
  p.arm_length_m = arm_length_m;
  p.mass_kg = mass_kg;
  p.circ_power_w = circ_power_w;
  p.wavelength_m = wavelength_m;
  p.bandwidth_rad = bandwidth_rad;
  p.coupling_rad = derive_coupling(p);
  p.validate();
  return p;
}

PlantParams PlantParams::reference_detector() {
  return from_power(4000.0, 200.0, 3.0e6, 2.0e-6, 2.0 * constants::pi * 115.0);
}

double PlantParams::carrier_rad() const {
  return 2.0 * constants::pi * constants::speed_of_light / wavelength_m;
}

double PlantParams::normalized_power() const {
  return 4.0 * circ_power_w * carrier_rad() / (mass_kg * arm_length_m * constants::speed_of_light);
}

void PlantParams::validate() const {
  require_positive(mass_kg, "mass_kg");
  require_positive(bandwidth_rad, "bandwidth_rad");
  require_positive(hbar, "hbar");
  if (!(arm_damping_rad >= 0.0) || !std::isfinite(arm_damping_rad)) {
    throw ParameterError("arm_damping_rad must be nonnegative");
  }
  if (!(coupling_rad >= 0.0) || !std::isfinite(coupling_rad)) {
    throw ParameterError("coupling_rad must be nonnegative");
  }
  if (!(mech_freq_rad >= 0.0) || !std::isfinite(mech_freq_rad)) {
    throw ParameterError("mech_freq_rad must be nonnegative");
  }
}

double derive_coupling(const PlantParams& params) {
  require_positive(params.arm_length_m, "arm_length_m");
  require_positive(params.mass_kg, "mass_kg");
  require_positive(params.wavelength_m, "wavelength_m");
  if (!(params.circ_power_w >= 0.0) || !std::isfinite(params.circ_power_w)) {
    throw ParameterError("circ_power_w must be nonnegative");
  }
  return std::sqrt(params.mass_kg * params.normalized_power() / (2.0 * params.hbar));
}

double arm_damping_from_loss(double arm_loss_ppm, double arm_length_m) {
  require_positive(arm_length_m, "arm_length_m");
  return arm_loss_ppm * 1e-6 * constants::speed_of_light / (4.0 * arm_length_m);
}

PlantParams with_arm_loss(const PlantParams& params, const LossBudgetSpec& losses) {
  PlantParams p = params;
  p.arm_damping_rad = arm_damping_from_loss(losses.arm_loss_ppm, params.arm_length_m);
  return p;
}

double k_sm(const PlantParams& params, double omega_rad) {
  const double g = params.bandwidth_rad;
  const double wa = params.coupling_rad;
  const double d = g * g + omega_rad * omega_rad;
  return 16.0 * params.hbar * wa * wa * g / (params.mass_kg * d * d);
}

double k_sm_dc(const PlantParams& params) {
  const double g = params.bandwidth_rad;
  const double wa = params.coupling_rad;
  return 16.0 * params.hbar * wa * wa / (params.mass_kg * g * g * g);
}

double x_sql(const PlantParams& params, double omega_rad) {
  require_omega(omega_rad);
  return std::sqrt(2.0 * params.hbar / (params.mass_kg * omega_rad * omega_rad));
}

CouplingFactors coupling_factors(const PlantParams& params, double omega_rad) {
  require_omega(omega_rad);
  const double g = params.bandwidth_rad;
  const double wa = params.coupling_rad;
  const double w2 = omega_rad * omega_rad;
  CouplingFactors f;
  f.omega_rad = omega_rad;
  f.k_sm = k_sm(params, omega_rad);
  f.k_pm = 4.0 * g * params.hbar * wa * wa / (params.mass_kg * w2 * (g * g + w2));
  f.k_z = (Complex(g, omega_rad) / Complex(0.0, 2.0 * omega_rad)) * f.k_sm;
  f.beta = std::atan(omega_rad / g);
  f.x_sql_m = x_sql(params, omega_rad);
  return f;
}

GammaFigure gamma_figure(const PlantParams& params, double omega_rad) {
  const double g = params.bandwidth_rad;
  const double wa2 = params.coupling_rad * params.coupling_rad;
  const double g3 = g * g * g;
  GammaFigure out;
  out.gamma_val = 256.0 * params.hbar * params.hbar * wa2 * wa2 /
                  (params.mass_kg * params.mass_kg * g3 * g3);
  out.omega_norm = omega_rad / g;
  return out;
}

OnlineBlocks lossless_online_blocks(const PlantParams& params, double omega_rad) {
  const CouplingFactors f = coupling_factors(params, omega_rad);
  const Complex e2 = std::polar(1.0, 2.0 * f.beta);
  const Complex e4 = std::polar(1.0, 4.0 * f.beta);
  OnlineBlocks b;
  b.t_v.resize(2, 2);
  b.t_v << 1.0, 0.0, -f.k_sm, 1.0;
  b.t_v *= e4;
  b.t_z.resize(2, 2);
  b.t_z << 1.0, 0.0, -f.k_z, 1.0;
  b.t_z *= e2;
  b.t = e2 * Vec2c(0.0, std::sqrt(2.0 * f.k_sm));
  return b;
}

OfflineBlocks lossless_offline_blocks(const PlantParams& params, double omega_rad) {
  const CouplingFactors f = coupling_factors(params, omega_rad);
  const Complex e1 = std::polar(1.0, f.beta);
  const Complex e2 = std::polar(1.0, 2.0 * f.beta);
  OfflineBlocks b;
  b.t_b.resize(2, 2);
  b.t_b << 1.0, 0.0, -f.k_pm, 1.0;
  b.t_b *= e2;
  b.t_v_prime.resize(2, 2);
  b.t_v_prime << 0.0, 0.0, f.k_pm, 0.0;
  b.t_v_prime *= e2;
  b.t_prime = e1 * Vec2c(0.0, std::sqrt(2.0 * f.k_pm));
  return b;
}

const std::vector<SourceGroup>& plant_source_groups() {
  static const std::vector<SourceGroup> groups = {
      {"victor_vacuum", source::victor, 2},
      {"epr", source::epr, 4},
      {"arm_loss", source::arm_loss, 4},
      {"bob_input_loss", source::input_loss, 2},
      {"bell_output_loss", source::bell_loss, 2},
  };
  return groups;
}

namespace {

const SourceGroup& find_group(const std::string& label) {
  for (const auto& g : plant_source_groups()) {
    if (g.label == label) return g;
  }
  throw ContractError("unknown plant source group '" + label + "'");
}

}  // namespace

ComplexMat PlantResponse::output_block(const std::string& label) const {
  const SourceGroup& g = find_group(label);
  return output.middleCols(g.first, g.size);
}

ComplexMat PlantResponse::bell_block(const std::string& label) const {
  const SourceGroup& g = find_group(label);
  return bell.middleCols(g.first, g.size);
}

PlantResponse solve_lossy_io(const PlantParams& params, double omega_rad, const WiringSpec& wiring,
                             const LossBudgetSpec& losses) {
  params.validate();
  wiring.validate();
  losses.validate();
  require_omega(omega_rad);

  const double gamma = params.bandwidth_rad;
  const double gamma2 = params.arm_damping_rad;
  const double om = omega_rad;
  const Complex cav(gamma + gamma2, -om);
  const double sg = std::sqrt(2.0 * gamma);
  const double sl = std::sqrt(2.0 * gamma2);
  const double q = x_sql(params, om);
  const double wb = params.coupling_rad;
  const double wa = wiring.mode == Mode::PositionMeter ? 0.0 : params.coupling_rad;
  const double force = kSqrt2 * params.hbar / (params.mass_kg * om * om * q);
  const double t_in = std::sqrt(1.0 - losses.eps_in);
  const double e_in = std::sqrt(losses.eps_in);
  const double t_out = std::sqrt(1.0 - losses.eps_out);
  const double e_out = std::sqrt(losses.eps_out);
  const double inv_sqrt2 = 1.0 / kSqrt2;

  // Loss-mixed Bell outcomes as linear forms over (unknowns, sources):
  // x_- = (v_out,1 - a_1) / sqrt2, p_+ = (v_out,2 + a_2) / sqrt2 with
  // v_out = -v_in + sqrt(2 gamma) A.
  URow bell_u[2];
  SRow bell_s[2];
  for (int j = 0; j < 2; ++j) {
    bell_u[j].setZero();
    bell_s[j].setZero();
    bell_u[j](kA1 + j) = t_out * inv_sqrt2 * sg;
    bell_s[j](source::victor + j) = -t_out * inv_sqrt2;
    bell_s[j](source::epr + j) = (j == 0 ? -1.0 : 1.0) * t_out * inv_sqrt2;
    bell_s[j](source::bell_loss + j) = e_out;
  }

  // Field entering Bob's cavity.
  const Complex gains[2] = {wiring.gain_x, wiring.gain_p};
  URow drive_u[2];
  SRow drive_s[2];
  for (int j = 0; j < 2; ++j) {
    drive_u[j].setZero();
    drive_s[j].setZero();
    drive_s[j](source::epr + 2 + j) = t_in;
    drive_s[j](source::input_loss + j) = e_in;
    drive_s[j](kInjectCol + j) = 1.0;
    if (wiring.mode == Mode::Online) {
      drive_u[j] += gains[j] * bell_u[j];
      drive_s[j] += gains[j] * bell_s[j];
    }
  }

  SysMat m = SysMat::Zero();
  SrcMat n = SrcMat::Zero();

  m(0, kA1) = cav;
  n(0, source::victor) = sg;
  n(0, source::arm_loss) = sl;

  m(1, kA2) = cav;
  m(1, kXi) = kSqrt2 * wa * q;
  n(1, source::victor + 1) = sg;
  n(1, source::arm_loss + 1) = sl;
  n(1, kSignalCol) = kSqrt2 * wa * q;

  m(2, kB1) = cav;
  m.row(2) -= sg * drive_u[0];
  n.row(2) += sg * drive_s[0];
  n(2, source::arm_loss + 2) += sl;

  // Bob's phase quadrature is pushed with the opposite sign to Victor's.
  m(3, kB2) = cav;
  m.row(3) -= sg * drive_u[1];
  m(3, kXi) += -kSqrt2 * wb * q;
  n.row(3) += sg * drive_s[1];
  n(3, source::arm_loss + 3) += sl;
  n(3, kSignalCol) = -kSqrt2 * wb * q;

  // -i Omega x = p / m  with x = x_SQL xi, p = m Omega x_SQL pi.
  m(4, kXi) = Complex(0.0, -1.0);
  m(4, kPi) = -1.0;

  // -i Omega p = -sqrt2 hbar (omega_a A1 - omega_a B1) - m omega_m^2 x.
  m(5, kPi) = Complex(0.0, -1.0);
  m(5, kXi) = (params.mech_freq_rad * params.mech_freq_rad) / (om * om);
  m(5, kA1) = force * wa;
  m(5, kB1) = -force * wb;

  Eigen::FullPivLU<SysMat> lu(m);
  if (!lu.isInvertible()) throw SolverError("plant system matrix is singular");
  const SrcMat u = lu.solve(n);
  if (!u.allFinite()) throw SolverError("plant solution is not finite");

  PlantResponse r;
  r.omega_rad = omega_rad;
  r.output.resize(2, source::count);
  r.bell.resize(2, source::count);
  r.output_injection.resize(2, 2);
  r.bell_injection.resize(2, 2);
  for (int j = 0; j < 2; ++j) {
    URow out_u = -drive_u[j];
    out_u(kB1 + j) += sg;
    const SRow out = out_u * u - drive_s[j];
    const SRow bell = bell_u[j] * u + bell_s[j];
    r.output.row(j) = out.leftCols(source::count);
    r.bell.row(j) = bell.leftCols(source::count);
    r.output_signal(j) = out(kSignalCol);
    r.bell_signal(j) = bell(kSignalCol);
    r.output_injection.row(j) = out.segment<2>(kInjectCol);
    r.bell_injection.row(j) = bell.segment<2>(kInjectCol);
  }
  return r;
}

}  // namespace qnb
