#include "qnb/qalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnb/errors.hpp"

namespace qnb {

namespace {

bool all_finite(const ComplexMat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double max_abs(const ComplexMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

SpectralDensityMat::SpectralDensityMat(ComplexMat m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ContractError("spectral density must be a non-empty square matrix");
  }
  if (!all_finite(m)) throw PsdViolation("spectral density has non-finite entries");
  const double scale = std::max(1.0, max_abs(m));
  const double asym = max_abs(m - m.adjoint());
  if (asym > kHermitianTol * scale) {
    std::ostringstream os;
    os << "spectral density not Hermitian (|S - S^H| = " << asym << ")";
    throw PsdViolation(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
  const double lmin = min_eigenvalue();
  if (lmin < -kPsdTol * scale) {
    std::ostringstream os;
    os << "spectral density not positive semidefinite (min eigenvalue " << lmin << ")";
    throw PsdViolation(os.str());
  }
}

SpectralDensityMat SpectralDensityMat::identity(Eigen::Index dim) {
  return SpectralDensityMat(ComplexMat::Identity(dim, dim));
}

SpectralDensityMat SpectralDensityMat::scaled_identity(Eigen::Index dim, double level) {
  return SpectralDensityMat(level * ComplexMat::Identity(dim, dim));
}

double SpectralDensityMat::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMat> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

HomodyneVector::HomodyneVector(double phi) : phi_(phi), h_(std::cos(phi), std::sin(phi)) {
  if (!std::isfinite(phi)) throw ParameterError("homodyne angle must be finite");
}

void NoiseBudget::add(std::string label, ComplexMat transfer, SpectralDensityMat input_psd) {
  if (transfer.rows() != 2) throw ContractError("contribution '" + label + "' must have 2 rows");
  if (transfer.cols() != input_psd.dim()) {
    throw ContractError("contribution '" + label + "' column count does not match its PSD");
  }
  if (has(label)) throw ContractError("duplicate contribution label '" + label + "'");
  items_.push_back({std::move(label), std::move(transfer), std::move(input_psd)});
}

void NoiseBudget::add_divergent(std::string label, ComplexMat transfer) {
  if (transfer.rows() != 2) throw ContractError("contribution '" + label + "' must have 2 rows");
  if (has(label)) throw ContractError("duplicate contribution label '" + label + "'");
  divergent_.push_back({std::move(label), std::move(transfer)});
}

bool NoiseBudget::has(const std::string& label) const {
  return std::any_of(items_.begin(), items_.end(),
                     [&](const Contribution& c) { return c.label == label; }) ||
         std::any_of(divergent_.begin(), divergent_.end(),
                     [&](const DivergentContribution& c) { return c.label == label; });
}

const Contribution& NoiseBudget::at(const std::string& label) const {
  for (const auto& c : items_) {
    if (c.label == label) return c;
  }
  throw ContractError("no contribution labelled '" + label + "'");
}

SpectralDensityMat propagate_psd(const ComplexMat& transfer, const SpectralDensityMat& input) {
  if (transfer.cols() != input.dim()) {
    throw ContractError("propagate_psd: transfer has " + std::to_string(transfer.cols()) +
                        " columns but input PSD has dimension " + std::to_string(input.dim()));
  }
  ComplexMat out = transfer * input.matrix() * transfer.adjoint();
  return SpectralDensityMat(0.5 * (out + out.adjoint()));
}

ComplexRow project(const HomodyneVector& h, const ComplexMat& transfer) {
  if (transfer.rows() != 2) throw ContractError("homodyne projection needs a 2-row transfer");
  const Eigen::Vector2d& c = h.components();
  return c(0) * transfer.row(0) + c(1) * transfer.row(1);
}

Complex project_signal(const HomodyneVector& h, const Vec2c& signal) {
  return h.components()(0) * signal(0) + h.components()(1) * signal(1);
}

double row_noise_power(const ComplexRow& row, const SpectralDensityMat& input) {
  if (row.size() != input.dim()) throw ContractError("row_noise_power: dimension mismatch");
  return (row * input.matrix() * row.adjoint())(0, 0).real();
}

double homodyne_noise_power(const NoiseBudget& budget, const HomodyneVector& h) {
  double reference = 1.0;
  for (const auto& c : budget.contributions()) reference = std::max(reference, max_abs(c.transfer));
  for (const auto& d : budget.divergent()) {
    const ComplexRow row = project(h, d.transfer);
    if (row.cwiseAbs().maxCoeff() > kDivergenceTol * reference) {
      throw DivergentNoise("contribution '" + d.label + "' is not cancelled at the readout");
    }
  }
  double total = 0.0;
  double scale = 0.0;
  for (const auto& c : budget.contributions()) {
    const double p = row_noise_power(project(h, c.transfer), c.input_psd);
    total += p;
    scale += std::abs(p);
  }
  if (total < -SpectralDensityMat::kPsdTol * std::max(1.0, scale)) {
    throw PsdViolation("homodyne noise power is negative");
  }
  return std::max(total, 0.0);
}

double homodyne_signal_power(const NoiseBudget& budget, const HomodyneVector& h) {
  return std::norm(project_signal(h, budget.signal()));
}

}  // namespace qnb
