#include "qnb/wiring.hpp"

#include <cmath>

#include "qnb/errors.hpp"

namespace qnb {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Online: return "online";
    case Mode::Offline: return "offline";
    case Mode::PositionMeter: return "pm";
    case Mode::Sql: return "sql";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  if (s == "online") return Mode::Online;
  if (s == "offline") return Mode::Offline;
  if (s == "pm" || s == "position_meter") return Mode::PositionMeter;
  if (s == "sql") return Mode::Sql;
  throw ParameterError("unknown mode '" + s + "' (expected online|offline|pm|sql)");
}

void WiringSpec::validate() const {
  auto finite = [](std::complex<double> z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!finite(gain_x) || !finite(gain_p)) throw ParameterError("feedforward gains must be finite");
}

void LossBudgetSpec::validate() const {
  auto fraction = [](double e, const char* name) {
    if (!(e >= 0.0 && e < 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1)");
  };
  fraction(eps_in, "eps_in");
  fraction(eps_out, "eps_out");
  if (!(arm_loss_ppm >= 0.0) || !std::isfinite(arm_loss_ppm)) {
    throw ParameterError("arm_loss_ppm must be nonnegative");
  }
  if (!(amplifier_gain_db >= 0.0) || !std::isfinite(amplifier_gain_db)) {
    throw ParameterError("amplifier_gain_db must be nonnegative");
  }
}

}  // namespace qnb
