#pragma once

// EPR resource, Bell-measurement channels, loss and amplifier channels, and
// Gaussian (Wiener) conditioning of the readout on the Bell outcomes.

#include <optional>
#include <string>

#include "qnb/plant.hpp"
#include "qnb/qalgebra.hpp"
#include "qnb/wiring.hpp"

namespace qnb {

/// Two-mode squeezed vacuum shared by Alice (a) and Bob (b).
class EprState {
 public:
  /// Squeezing above this level is clamped when a finite matrix is built.
  static constexpr double kMaxFiniteDb = 60.0;

  static EprState from_r(double r);
  static EprState from_db(double db);
  static EprState infinite() { return EprState(0.0, true); }
  static EprState vacuum() { return from_r(0.0); }

  bool is_infinite() const { return infinite_; }
  /// Squeeze factor r; throws AnalyticLimitRequired for the infinite state.
  double squeeze_r() const;
  /// 20 log10(e) r, i.e. the suppression of the EPR combinations in dB.
  double squeeze_db() const;
  /// r clamped to kMaxFiniteDb.
  double effective_r() const;

 private:
  EprState(double r, bool inf) : r_(r), infinite_(inf) {}
  double r_;
  bool infinite_;
};

/// 4 x 4 quadrature spectral density over (a1, a2, b1, b2):
/// cosh 2r on the diagonal, +sinh 2r between a1 and b1, -sinh 2r between a2
/// and b2. Throws AnalyticLimitRequired for the infinite state.
SpectralDensityMat epr_psd(const EprState& state);

/// Real 4 x 4 Q with (a1, a2, b1, b2)^T = Q (l1, l2, s1, s2)^T, where l are
/// the anti-squeezed (e^{2r}) and s the squeezed (e^{-2r}) EPR combinations:
/// s1 = (a1 - b1)/sqrt2, s2 = (a2 + b2)/sqrt2, l1 = (a1 + b1)/sqrt2,
/// l2 = (a2 - b2)/sqrt2.
Eigen::Matrix4d epr_mode_basis();

/// Noise budget of a plant port (2 rows) with every source group attached to
/// its input spectral density. For the infinite EPR state the anti-squeezed
/// combinations become a divergent contribution and the squeezed ones drop
/// out.
NoiseBudget attach_sources(const ComplexMat& transfer, const Vec2c& signal, const EprState& epr);

/// Transfers from every input to the loss-mixed Bell outcomes (x_-, p_+).
struct BellChannels {
  NoiseBudget channels;
};

BellChannels bell_channels(const PlantParams& params, double omega_rad, const EprState& epr,
                           const LossBudgetSpec& losses,
                           const WiringSpec& wiring = WiringSpec::offline());

enum class Port { Input, Output };

/// Beam-splitter loss sqrt(1 - eps) x + sqrt(eps) x' on every transfer; a unit
/// vacuum contribution `vacuum_label` is appended. Uses eps_in for the input
/// port and eps_out for the output port.
NoiseBudget apply_io_losses(const NoiseBudget& budget, const LossBudgetSpec& losses, Port port,
                            const std::string& vacuum_label = "");

/// Ideal phase-sensitive amplifier aligned with `h`: the measured quadrature
/// gains G = 10^{gain_db / 20}, the orthogonal one 1 / G.
NoiseBudget apply_readout_amplifier(const NoiseBudget& budget, const HomodyneVector& h,
                                    double gain_db);

using FilterPair = Eigen::RowVector2cd;

struct ConditioningResult {
  double conditioned_power = 0.0;
  FilterPair filters = FilterPair::Zero();  // applied as y + g_x x_- + g_p p_+
};

/// Wiener conditioning g = -S_{y alpha} S_{alpha alpha}^{-1}. The alpha PSD
/// is regularized by 1e-12 trace I when its condition number exceeds 1e12.
ConditioningResult condition_offline(double y_psd, const FilterPair& y_alpha_cross,
                                     const SpectralDensityMat& alpha_psd);

/// Conditioning in the presence of divergent inputs: the filters null the
/// divergent part of y + g alpha exactly and minimize the finite remainder.
ConditioningResult condition_offline_limit(double y_psd, const FilterPair& y_alpha_cross,
                                           const SpectralDensityMat& alpha_psd,
                                           const ComplexRow& y_divergent,
                                           const ComplexMat& alpha_divergent);

/// Offline filters of the lossless, infinitely squeezed plant, in the
/// (x_-, p_+) channel basis: g_x = sqrt2 K_z^* e^{4 i beta},
/// g_p = sqrt2 e^{2 i beta}.
FilterPair closed_form_filters(const PlantParams& params, double omega_rad);

/// Filter frame (g_1, g_2) used to quote the closed forms: g_1 weights the
/// channel sqrt2 p_+, g_2 weights -sqrt2 e^{2 i beta} x_-. In this frame the
/// lossless optimum is g_1 = e^{2 i beta}, g_2 = -K_z^* e^{2 i beta}.
FilterPair to_filter_frame(const FilterPair& channel_filters, double beta);
FilterPair from_filter_frame(const FilterPair& frame_filters, double beta);

/// Feedforward gains that make the online readout equal to the offline
/// readout conditioned with `filters`. `y_injection` is the readout response
/// to a unit field added to Bob's cavity input (1 x 2) and `bell_injection`
/// the Bell outcomes' response to the same (2 x 2).
FilterPair gains_for_filters(const FilterPair& filters, const ComplexRow& y_injection,
                             const ComplexMat& bell_injection);

}  // namespace qnb
