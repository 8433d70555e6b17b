#pragma once

#include <complex>
#include <string>

namespace qnb {

enum class Mode { Online, Offline, PositionMeter, Sql };

std::string to_string(Mode m);
/// Accepts "online", "offline", "pm" / "position_meter", "sql".
Mode mode_from_string(const std::string& s);

/// How Bob's cavity input is formed.
///
/// Online: Bob's (input-lossy) EPR half plus the Bell outcomes scaled by
/// `gain_x`, `gain_p`. Offline: Bob's EPR half only; the Bell outcomes are
/// recorded for post-processing. PositionMeter: the first cavity is decoupled
/// from the mirror and the second sees a plain vacuum input.
struct WiringSpec {
  Mode mode = Mode::Offline;
  std::complex<double> gain_x{1.4142135623730951, 0.0};
  std::complex<double> gain_p{1.4142135623730951, 0.0};
  bool optimize_gains = false;

  static WiringSpec online(bool optimize = false) {
    WiringSpec w;
    w.mode = Mode::Online;
    w.optimize_gains = optimize;
    return w;
  }
  static WiringSpec offline() { return WiringSpec{}; }
  static WiringSpec position_meter() {
    WiringSpec w;
    w.mode = Mode::PositionMeter;
    return w;
  }

  void validate() const;
};

/// Optical losses outside the plant's internal damping, plus the readout
/// amplifier setting.
struct LossBudgetSpec {
  double eps_in = 0.0;            // power loss on Bob's input
  double eps_out = 0.0;           // power loss on every detection port
  double arm_loss_ppm = 0.0;      // round-trip arm loss
  double amplifier_gain_db = 0.0; // 0 disables the readout amplifier

  static LossBudgetSpec lossless() { return {}; }

  bool is_lossless() const { return eps_in == 0.0 && eps_out == 0.0 && arm_loss_ppm == 0.0; }
  void validate() const;
};

}  // namespace qnb
