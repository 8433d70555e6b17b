#include "qnb/teleport.hpp"

#include <cmath>

#include "qnb/errors.hpp"

namespace qnb {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kDbPerNeper = 8.685889638065035;  // 20 / ln 10

}  // namespace

EprState EprState::from_r(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("squeeze factor must be finite and >= 0");
  return EprState(r, false);
}

EprState EprState::from_db(double db) {
  if (std::isinf(db) && db > 0) return infinite();
  if (!(db >= 0.0) || !std::isfinite(db)) throw ParameterError("squeezing in dB must be >= 0");
  return EprState(db / kDbPerNeper, false);
}

double EprState::squeeze_r() const {
  if (infinite_) throw AnalyticLimitRequired("infinite squeezing has no finite squeeze factor");
  return r_;
}

double EprState::squeeze_db() const {
  if (infinite_) return std::numeric_limits<double>::infinity();
  return r_ * kDbPerNeper;
}

double EprState::effective_r() const {
  if (infinite_) throw AnalyticLimitRequired("infinite squeezing has no finite squeeze factor");
  return std::min(r_, kMaxFiniteDb / kDbPerNeper);
}

SpectralDensityMat epr_psd(const EprState& state) {
  if (state.is_infinite()) {
    throw AnalyticLimitRequired("epr_psd: the infinitely squeezed state has no finite matrix");
  }
  const double r = state.effective_r();
  const double c = std::cosh(2.0 * r);
  const double s = std::sinh(2.0 * r);
  ComplexMat m = ComplexMat::Zero(4, 4);
  m.diagonal().setConstant(c);
  m(0, 2) = m(2, 0) = s;
  m(1, 3) = m(3, 1) = -s;
  return SpectralDensityMat(m);
}

Eigen::Matrix4d epr_mode_basis() {
  const double h = 1.0 / kSqrt2;
  Eigen::Matrix4d q;
  // columns: l1, l2, s1, s2
  q << h, 0, h, 0,    // a1
       0, h, 0, h,    // a2
       h, 0, -h, 0,   // b1
       0, -h, 0, h;   // b2
  return q;
}

NoiseBudget attach_sources(const ComplexMat& transfer, const Vec2c& signal, const EprState& epr) {
  if (transfer.rows() != 2 || transfer.cols() != source::count) {
    throw ContractError("attach_sources expects a 2 x " + std::to_string(source::count) + " transfer");
  }
  NoiseBudget b(signal);
  for (const auto& g : plant_source_groups()) {
    ComplexMat block = transfer.middleCols(g.first, g.size);
    if (g.label != "epr") {
      b.add(g.label, std::move(block), SpectralDensityMat::identity(g.size));
      continue;
    }
    if (!epr.is_infinite()) {
      b.add(g.label, std::move(block), epr_psd(epr));
      continue;
    }
    const ComplexMat modes = block * epr_mode_basis().cast<Complex>();
    b.add_divergent("epr_antisqueezed", modes.leftCols(2));
  }
  return b;
}

BellChannels bell_channels(const PlantParams& params, double omega_rad, const EprState& epr,
                           const LossBudgetSpec& losses, const WiringSpec& wiring) {
  const PlantResponse r = solve_lossy_io(params, omega_rad, wiring, losses);
  return {attach_sources(r.bell, r.bell_signal, epr)};
}

NoiseBudget apply_io_losses(const NoiseBudget& budget, const LossBudgetSpec& losses, Port port,
                            const std::string& vacuum_label) {
  const double eps = port == Port::Input ? losses.eps_in : losses.eps_out;
  if (!(eps >= 0.0 && eps < 1.0)) throw ParameterError("loss fraction must lie in [0, 1)");
  if (eps == 0.0) return budget;
  const double keep = std::sqrt(1.0 - eps);
  NoiseBudget out(keep * budget.signal());
  for (const auto& c : budget.contributions()) out.add(c.label, keep * c.transfer, c.input_psd);
  for (const auto& d : budget.divergent()) out.add_divergent(d.label, keep * d.transfer);
  const std::string label =
      vacuum_label.empty() ? (port == Port::Input ? "input_loss" : "readout_loss") : vacuum_label;
  out.add(label, std::sqrt(eps) * ComplexMat::Identity(2, 2), SpectralDensityMat::identity(2));
  return out;
}

NoiseBudget apply_readout_amplifier(const NoiseBudget& budget, const HomodyneVector& h,
                                    double gain_db) {
  if (!(gain_db >= 0.0) || !std::isfinite(gain_db)) {
    throw ParameterError("amplifier gain must be finite and >= 0 dB");
  }
  if (gain_db == 0.0) return budget;
  const double g = std::pow(10.0, gain_db / 20.0);
  const Eigen::Vector2d u = h.components();
  const Eigen::Vector2d w = h.orthogonal();
  const ComplexMat amp = (g * u * u.transpose() + (1.0 / g) * w * w.transpose()).cast<Complex>();
  NoiseBudget out(amp * budget.signal());
  for (const auto& c : budget.contributions()) out.add(c.label, amp * c.transfer, c.input_psd);
  for (const auto& d : budget.divergent()) out.add_divergent(d.label, amp * d.transfer);
  return out;
}

ConditioningResult condition_offline(double y_psd, const FilterPair& y_alpha_cross,
                                     const SpectralDensityMat& alpha_psd) {
  if (alpha_psd.dim() != 2) throw ContractError("condition_offline expects a 2 x 2 alpha PSD");
  ComplexMat a = alpha_psd.matrix();
  const double trace = a.trace().real();
  if (!(trace > 0.0)) {
    if (y_alpha_cross.norm() == 0.0) return {y_psd, FilterPair::Zero()};
    throw ConditioningError("alpha PSD vanishes but is correlated with the readout");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMat> es(a, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) a += 1e-12 * trace * ComplexMat::Identity(2, 2);

  Eigen::FullPivLU<ComplexMat> lu(a.transpose());
  if (!lu.isInvertible()) throw ConditioningError("alpha PSD is not invertible after regularization");
  const Eigen::Vector2cd gt = lu.solve(-y_alpha_cross.transpose());
  ConditioningResult res;
  res.filters = gt.transpose();
  const double reduction = (res.filters * y_alpha_cross.adjoint())(0, 0).real();
  res.conditioned_power = std::max(0.0, y_psd + reduction);
  return res;
}

ConditioningResult condition_offline_limit(double y_psd, const FilterPair& y_alpha_cross,
                                           const SpectralDensityMat& alpha_psd,
                                           const ComplexRow& y_divergent,
                                           const ComplexMat& alpha_divergent) {
  const Eigen::Index d = y_divergent.size();
  if (d == 0) return condition_offline(y_psd, y_alpha_cross, alpha_psd);
  if (alpha_divergent.rows() != 2 || alpha_divergent.cols() != d || alpha_psd.dim() != 2) {
    throw ContractError("condition_offline_limit: dimension mismatch");
  }
  // KKT system for x = g^dagger: minimize x^H A x + 2 Re(c x) subject to
  // alpha_div^H x = -y_div^H.
  const Eigen::Index n = 2 + d;
  ComplexMat kkt = ComplexMat::Zero(n, n);
  kkt.topLeftCorner(2, 2) = alpha_psd.matrix();
  kkt.topRightCorner(2, d) = alpha_divergent;
  kkt.bottomLeftCorner(d, 2) = alpha_divergent.adjoint();
  Eigen::VectorXcd rhs(n);
  rhs.head(2) = -y_alpha_cross.adjoint();
  rhs.tail(d) = -y_divergent.adjoint();
  const Eigen::VectorXcd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  const Eigen::Vector2cd x = sol.head(2);

  ConditioningResult res;
  res.filters = x.adjoint();
  const double reference =
      std::max({1.0, y_divergent.cwiseAbs().maxCoeff(), alpha_divergent.cwiseAbs().maxCoeff()});
  const double residual = (y_divergent + res.filters * alpha_divergent).cwiseAbs().maxCoeff();
  if (!std::isfinite(residual) || residual > kDivergenceTol * reference) {
    throw DivergentNoise("Bell outcomes cannot cancel the anti-squeezed EPR noise in the readout");
  }
  const double p = y_psd + 2.0 * (y_alpha_cross * x)(0, 0).real() +
                   (x.adjoint() * alpha_psd.matrix() * x)(0, 0).real();
  res.conditioned_power = std::max(0.0, p);
  return res;
}

FilterPair closed_form_filters(const PlantParams& params, double omega_rad) {
  const CouplingFactors f = coupling_factors(params, omega_rad);
  FilterPair g;
  g(0) = kSqrt2 * std::conj(f.k_z) * std::polar(1.0, 4.0 * f.beta);
  g(1) = kSqrt2 * std::polar(1.0, 2.0 * f.beta);
  return g;
}

FilterPair to_filter_frame(const FilterPair& channel_filters, double beta) {
  FilterPair g;
  g(0) = channel_filters(1) / kSqrt2;
  g(1) = -std::polar(1.0, -2.0 * beta) * channel_filters(0) / kSqrt2;
  return g;
}

FilterPair from_filter_frame(const FilterPair& frame_filters, double beta) {
  FilterPair g;
  g(0) = -kSqrt2 * std::polar(1.0, 2.0 * beta) * frame_filters(1);
  g(1) = kSqrt2 * frame_filters(0);
  return g;
}

FilterPair gains_for_filters(const FilterPair& filters, const ComplexRow& y_injection,
                             const ComplexMat& bell_injection) {
  if (y_injection.size() != 2 || bell_injection.rows() != 2 || bell_injection.cols() != 2) {
    throw ContractError("gains_for_filters: injection responses must be 1 x 2 and 2 x 2");
  }
  // With feedforward G the online readout is y_off + y_inj G (I - K G)^{-1} alpha_off.
  // The amplitude outcome never sees Bob's cavity and Bob's phase input never
  // moves the mirror, so K is strictly lower triangular.
  const double scale = std::max(1.0, bell_injection.cwiseAbs().maxCoeff());
  if (std::abs(bell_injection(0, 0)) + std::abs(bell_injection(0, 1)) + std::abs(bell_injection(1, 1)) >
      1e-9 * scale) {
    throw SolverError("unexpected Bell-outcome response to Bob's input");
  }
  const Complex kappa = bell_injection(1, 0);
  const double yscale = std::max(1e-300, y_injection.cwiseAbs().maxCoeff());
  auto solve = [&](Complex target, Complex coeff, const char* what) -> Complex {
    if (std::abs(coeff) <= 1e-12 * yscale) {
      if (std::abs(target) <= 1e-12 * std::max(1.0, std::abs(target))) return 0.0;
      throw ConditioningError(std::string("feedforward cannot reach the ") + what + " filter");
    }
    return target / coeff;
  };
  FilterPair gains;
  gains(1) = solve(filters(1), y_injection(1), "phase");
  gains(0) = solve(filters(0), y_injection(0) + filters(1) * kappa, "amplitude");
  return gains;
}

}  // namespace qnb
