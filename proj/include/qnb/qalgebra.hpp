#pragma once

// Complex quadrature-space algebra: transfer blocks, vacuum-normalized
// spectral-density matrices, homodyne projection and budget summation.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qnb {

using Complex = std::complex<double>;
using ComplexMat = Eigen::MatrixXcd;
using ComplexRow = Eigen::RowVectorXcd;
using Vec2c = Eigen::Vector2cd;

/// Hermitian positive-semidefinite spectral-density matrix.
///
/// Vacuum is the identity (one unit per quadrature). Construction checks the
/// Hermitian and PSD invariants and stores the symmetrized (S + S^dagger)/2.
class SpectralDensityMat {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kPsdTol = 1e-10;

  explicit SpectralDensityMat(ComplexMat m);

  static SpectralDensityMat identity(Eigen::Index dim);
  static SpectralDensityMat scaled_identity(Eigen::Index dim, double level);

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMat& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Smallest eigenvalue of the stored matrix.
  double min_eigenvalue() const;

 private:
  ComplexMat m_;
};

/// Readout direction b_phi = b1 cos(phi) + b2 sin(phi); phi = pi/2 reads the
/// phase quadrature.
class HomodyneVector {
 public:
  explicit HomodyneVector(double phi);

  double phi() const { return phi_; }
  const Eigen::Vector2d& components() const { return h_; }
  /// Unit vector orthogonal to the readout direction.
  Eigen::Vector2d orthogonal() const { return {-h_(1), h_(0)}; }

 private:
  double phi_;
  Eigen::Vector2d h_;
};

struct Contribution {
  std::string label;
  ComplexMat transfer;  // 2 x k
  SpectralDensityMat input_psd;
};

/// Input with unbounded spectral density (an infinitely anti-squeezed EPR
/// quadrature). It must be cancelled exactly in whatever is read out.
struct DivergentContribution {
  std::string label;
  ComplexMat transfer;  // 2 x k
};

/// Sum of independent noise contributions feeding a two-quadrature output,
/// together with the signal transfer of the same output.
class NoiseBudget {
 public:
  NoiseBudget() : signal_(Vec2c::Zero()) {}
  explicit NoiseBudget(Vec2c signal) : signal_(std::move(signal)) {}

  /// Throws ContractError on a duplicate label, a transfer that does not have
  /// two rows, or a column count that differs from the PSD dimension.
  void add(std::string label, ComplexMat transfer, SpectralDensityMat input_psd);

  /// Labels share one namespace with the finite contributions.
  void add_divergent(std::string label, ComplexMat transfer);

  const std::vector<Contribution>& contributions() const { return items_; }
  const std::vector<DivergentContribution>& divergent() const { return divergent_; }
  std::vector<DivergentContribution>& mutable_divergent() { return divergent_; }
  std::vector<Contribution>& mutable_contributions() { return items_; }
  const Vec2c& signal() const { return signal_; }
  void set_signal(Vec2c s) { signal_ = std::move(s); }

  bool has(const std::string& label) const;
  const Contribution& at(const std::string& label) const;

 private:
  std::vector<Contribution> items_;
  std::vector<DivergentContribution> divergent_;
  Vec2c signal_;
};

/// T S T^dagger, symmetrized.
SpectralDensityMat propagate_psd(const ComplexMat& transfer, const SpectralDensityMat& input);

/// Relative size below which a projected divergent transfer counts as cancelled.
inline constexpr double kDivergenceTol = 1e-9;

/// Sum over contributions of h^T (T S T^dagger) h. Throws DivergentNoise if a
/// divergent contribution survives the projection.
double homodyne_noise_power(const NoiseBudget& budget, const HomodyneVector& h);

/// |h^T t|^2.
double homodyne_signal_power(const NoiseBudget& budget, const HomodyneVector& h);

/// r S r^dagger for a single output row.
double row_noise_power(const ComplexRow& row, const SpectralDensityMat& input);

/// h^T M as a complex row.
ComplexRow project(const HomodyneVector& h, const ComplexMat& transfer);
/// h^T t.
Complex project_signal(const HomodyneVector& h, const Vec2c& signal);

}  // namespace qnb
