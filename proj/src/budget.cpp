#include "qnb/budget.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include "qnb/errors.hpp"

namespace qnb {

namespace {

// Readout port of the plant: amplifier, then detection loss.
NoiseBudget readout_chain(NoiseBudget b, const HomodyneVector& h, const LossBudgetSpec& losses) {
  b = apply_readout_amplifier(b, h, losses.amplifier_gain_db);
  return apply_io_losses(b, losses, Port::Output, "readout_loss");
}

NoiseBudget position_meter_output(const PlantResponse& r) {
  NoiseBudget b(r.output_signal);
  const SourceGroup probe{"probe_vacuum", source::epr, 4};
  for (const auto& g : plant_source_groups()) {
    if (g.label == "epr") {
      b.add(probe.label, r.output.middleCols(probe.first, probe.size), SpectralDensityMat::identity(4));
      continue;
    }
    ComplexMat block = r.output.middleCols(g.first, g.size);
    if (block.cwiseAbs().maxCoeff() == 0.0) continue;
    b.add(g.label, std::move(block), SpectralDensityMat::identity(g.size));
  }
  return b;
}

struct Measured {
  double noise = 0.0;
  Complex signal{0.0, 0.0};
  std::vector<std::pair<std::string, double>> parts;
  FilterPair filters = FilterPair::Zero();
};

Measured measure_direct(const NoiseBudget& out, const HomodyneVector& h) {
  Measured m;
  m.noise = homodyne_noise_power(out, h);
  m.signal = project_signal(h, out.signal());
  for (const auto& c : out.contributions()) {
    m.parts.emplace_back(c.label, row_noise_power(project(h, c.transfer), c.input_psd));
  }
  return m;
}

// Conditions the readout on the Bell outcomes. The Wiener step acts on the
// signal-free combinations alpha~ = alpha - (t_alpha / t_y) y, so that at
// fixed readout signal the conditioned noise, and hence S_x, is minimal. The
// reported filters g act on the raw outcomes: y + g alpha is proportional to
// y + h alpha~ with g = h / (1 - h r).
Measured measure_conditioned(const NoiseBudget& out, const NoiseBudget& bell, const HomodyneVector& h) {
  const Complex t_y = project_signal(h, out.signal());
  const bool deflate = std::abs(t_y) > 0.0;
  const Vec2c ratio = deflate ? Vec2c(bell.signal() / t_y) : Vec2c::Zero();

  double s_yy = 0.0;
  FilterPair s_ya = FilterPair::Zero();
  ComplexMat s_aa = ComplexMat::Zero(2, 2);
  struct Row {
    const Contribution* c;
    ComplexRow y;
    ComplexMat a;
  };
  std::vector<Row> rows;
  auto accumulate = [&](const Contribution& c, ComplexRow y, ComplexMat a) {
    a -= ratio * y;
    const ComplexMat& s = c.input_psd.matrix();
    s_yy += (y * s * y.adjoint())(0, 0).real();
    s_ya += y * s * a.adjoint();
    s_aa += a * s * a.adjoint();
    rows.push_back({&c, std::move(y), std::move(a)});
  };
  for (const auto& c : out.contributions()) {
    accumulate(c, project(h, c.transfer),
               bell.has(c.label) ? bell.at(c.label).transfer : ComplexMat::Zero(2, c.transfer.cols()));
  }
  for (const auto& c : bell.contributions()) {
    if (!out.has(c.label)) accumulate(c, ComplexRow::Zero(c.transfer.cols()), c.transfer);
  }

  ComplexRow y_div(0);
  ComplexMat a_div(2, 0);
  for (const auto& d : out.divergent()) {
    const ComplexRow y = project(h, d.transfer);
    ComplexMat a = ComplexMat::Zero(2, d.transfer.cols());
    for (const auto& bd : bell.divergent()) {
      if (bd.label == d.label) a = bd.transfer;
    }
    a -= ratio * y;
    const Eigen::Index k = y_div.size();
    y_div.conservativeResize(k + y.size());
    y_div.tail(y.size()) = y;
    a_div.conservativeResize(2, k + y.size());
    a_div.rightCols(y.size()) = a;
  }
  const SpectralDensityMat alpha_psd(0.5 * (s_aa + s_aa.adjoint()));
  const ConditioningResult cond =
      y_div.size() == 0 ? condition_offline(s_yy, s_ya, alpha_psd)
                        : condition_offline_limit(s_yy, s_ya, alpha_psd, y_div, a_div);

  Measured m;
  const Complex scale = 1.0 - (cond.filters * ratio)(0, 0);
  if (std::abs(scale) < 1e-12) {
    throw ConditioningError("optimal estimate carries no weight on the readout port");
  }
  m.filters = cond.filters / scale;
  m.signal = t_y + (m.filters * bell.signal())(0, 0);
  const Complex back = 1.0 / scale;
  for (const auto& r : rows) {
    const ComplexRow row = back * (r.y + cond.filters * r.a);
    const double p = row_noise_power(row, r.c->input_psd);
    m.parts.emplace_back(r.c->label, p);
    m.noise += p;
  }
  return m;
}

PointResult finish(const PlantParams& params, double omega_rad, const Measured& m) {
  PointResult r;
  r.omega_rad = omega_rad;
  r.noise_power = m.noise;
  r.signal_power = std::norm(m.signal);
  r.filters = m.filters;
  const double xs2 = 2.0 * params.hbar / (params.mass_kg * omega_rad * omega_rad);
  const double inv = r.signal_power > 0.0 ? xs2 / r.signal_power : std::numeric_limits<double>::infinity();
  r.psd_m2_per_hz = m.noise * inv;
  for (const auto& [label, p] : m.parts) r.contributions.emplace_back(label, p * inv);
  return r;
}

}  // namespace

double HomodyneChoice::resolve(const PlantParams& params) const {
  return optimal ? optimal_homodyne_angle(params) : phi;
}

std::vector<double> log_spaced_grid(double f_min_hz, double f_max_hz, int n_points) {
  if (!(f_min_hz > 0.0) || !std::isfinite(f_min_hz)) throw ParameterError("f_min must be positive");
  if (!(f_max_hz > f_min_hz) || !std::isfinite(f_max_hz)) throw ParameterError("f_max must exceed f_min");
  if (n_points < 2) throw ParameterError("a grid needs at least 2 points");
  std::vector<double> f(static_cast<std::size_t>(n_points));
  const double a = std::log(f_min_hz);
  const double step = (std::log(f_max_hz) - a) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) f[i] = std::exp(a + step * i);
  f.front() = f_min_hz;
  f.back() = f_max_hz;
  return f;
}

PointResult evaluate_point(const PlantParams& params, const LossBudgetSpec& losses,
                           const EprState& epr, const WiringSpec& wiring, double phi,
                           double omega_rad) {
  losses.validate();
  const PlantParams p = with_arm_loss(params, losses);
  const HomodyneVector h(phi);

  switch (wiring.mode) {
    case Mode::Sql:
      throw ContractError("evaluate_point: the SQL has no readout chain; use sql_curve");
    case Mode::PositionMeter: {
      const PlantResponse r = solve_lossy_io(p, omega_rad, wiring, losses);
      return finish(p, omega_rad, measure_direct(readout_chain(position_meter_output(r), h, losses), h));
    }
    case Mode::Offline: {
      const PlantResponse r = solve_lossy_io(p, omega_rad, wiring, losses);
      const NoiseBudget out = readout_chain(attach_sources(r.output, r.output_signal, epr), h, losses);
      const NoiseBudget bell = attach_sources(r.bell, r.bell_signal, epr);
      return finish(p, omega_rad, measure_conditioned(out, bell, h));
    }
    case Mode::Online: {
      WiringSpec w = wiring;
      if (wiring.optimize_gains) {
        const PlantResponse off = solve_lossy_io(p, omega_rad, WiringSpec::offline(), losses);
        const NoiseBudget out = readout_chain(attach_sources(off.output, off.output_signal, epr), h, losses);
        const NoiseBudget bell = attach_sources(off.bell, off.bell_signal, epr);
        const Measured cond = measure_conditioned(out, bell, h);
        NoiseBudget inj;
        inj.add("injection", off.output_injection, SpectralDensityMat::identity(2));
        inj = readout_chain(std::move(inj), h, losses);
        const FilterPair g =
            gains_for_filters(cond.filters, project(h, inj.at("injection").transfer), off.bell_injection);
        w.gain_x = g(0);
        w.gain_p = g(1);
      }
      const PlantResponse r = solve_lossy_io(p, omega_rad, w, losses);
      const NoiseBudget out = readout_chain(attach_sources(r.output, r.output_signal, epr), h, losses);
      PointResult res = finish(p, omega_rad, measure_direct(out, h));
      res.gains << w.gain_x, w.gain_p;
      return res;
    }
  }
  throw ContractError("evaluate_point: unknown mode");
}

const std::vector<double>& SensitivityCurve::contribution(const std::string& label) const {
  for (const auto& [l, v] : per_contribution) {
    if (l == label) return v;
  }
  throw ContractError("curve has no contribution '" + label + "'");
}

namespace {

void check_grid(const std::vector<double>& grid_hz) {
  if (grid_hz.empty()) throw ParameterError("frequency grid is empty");
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    if (!(grid_hz[i] > 0.0) || !std::isfinite(grid_hz[i])) {
      throw ParameterError("frequency grid must be positive and finite");
    }
    if (i > 0 && !(grid_hz[i] > grid_hz[i - 1])) throw ParameterError("frequency grid must ascend");
  }
}

SensitivityCurve sweep(const PlantParams& params, const LossBudgetSpec& losses, const EprState& epr,
                       const HomodyneChoice& choice, const std::vector<double>& grid_hz,
                       const WiringSpec& wiring, unsigned threads) {
  check_grid(grid_hz);
  params.validate();
  const double phi = choice.resolve(params);
  const std::size_t n = grid_hz.size();
  std::vector<PointResult> points(n);

  auto work = [&](std::size_t begin, std::size_t stride, std::exception_ptr& err) {
    try {
      for (std::size_t i = begin; i < n; i += stride) {
        points[i] = evaluate_point(params, losses, epr, wiring, phi, 2.0 * constants::pi * grid_hz[i]);
      }
    } catch (...) {
      err = std::current_exception();
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::exception_ptr> errors(t);
  if (t == 1) {
    work(0, 1, errors[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(work, k, t, std::ref(errors[k]));
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SensitivityCurve c;
  c.freqs_hz = grid_hz;
  c.mode = wiring.mode;
  c.phi_used = phi;
  if (!choice.optimal) c.homodyne_phi = phi;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    c.total_psd_m2_per_hz.push_back(points[i].psd_m2_per_hz);
    for (const auto& [label, v] : points[i].contributions) {
      auto it = index.find(label);
      if (it == index.end()) {
        it = index.emplace(label, c.per_contribution.size()).first;
        c.per_contribution.emplace_back(label, std::vector<double>(n, 0.0));
      }
      c.per_contribution[it->second].second[i] = v;
    }
  }
  return c;
}

}  // namespace

SensitivityCurve online_sensitivity(const PlantParams& params, const LossBudgetSpec& losses,
                                    const EprState& epr, const HomodyneChoice& phi,
                                    const std::vector<double>& grid_hz, const SweepOptions& opts) {
  WiringSpec w = WiringSpec::online(opts.optimize_gains);
  w.gain_x = opts.gains(0);
  w.gain_p = opts.gains(1);
  return sweep(params, losses, epr, phi, grid_hz, w, opts.threads);
}

SensitivityCurve offline_sensitivity(const PlantParams& params, const LossBudgetSpec& losses,
                                     const EprState& epr, const HomodyneChoice& phi,
                                     const std::vector<double>& grid_hz, const SweepOptions& opts) {
  return sweep(params, losses, epr, phi, grid_hz, WiringSpec::offline(), opts.threads);
}

SensitivityCurve position_meter_sensitivity(const PlantParams& params,
                                            const std::vector<double>& grid_hz) {
  check_grid(grid_hz);
  params.validate();
  SensitivityCurve c;
  c.freqs_hz = grid_hz;
  c.mode = Mode::PositionMeter;
  c.homodyne_phi = constants::pi / 2.0;
  c.phi_used = constants::pi / 2.0;
  std::vector<double> shot, rp;
  for (double f : grid_hz) {
    const CouplingFactors k = coupling_factors(params, 2.0 * constants::pi * f);
    const double half = 0.5 * k.x_sql_m * k.x_sql_m;
    const double s = k.k_pm > 0.0 ? half / k.k_pm : std::numeric_limits<double>::infinity();
    shot.push_back(s);
    rp.push_back(half * k.k_pm);
    c.total_psd_m2_per_hz.push_back(s + half * k.k_pm);
  }
  c.per_contribution.emplace_back("shot", std::move(shot));
  c.per_contribution.emplace_back("radiation_pressure", std::move(rp));
  return c;
}

SensitivityCurve position_meter_sensitivity(const PlantParams& params, const LossBudgetSpec& losses,
                                            const std::vector<double>& grid_hz,
                                            const SweepOptions& opts) {
  return sweep(params, losses, EprState::vacuum(), HomodyneChoice::fixed(constants::pi / 2.0),
               grid_hz, WiringSpec::position_meter(), opts.threads);
}

SensitivityCurve sql_curve(const PlantParams& params, const std::vector<double>& grid_hz) {
  check_grid(grid_hz);
  params.validate();
  SensitivityCurve c;
  c.freqs_hz = grid_hz;
  c.mode = Mode::Sql;
  std::vector<double> v;
  for (double f : grid_hz) {
    const double x = x_sql(params, 2.0 * constants::pi * f);
    v.push_back(x * x);
  }
  c.total_psd_m2_per_hz = v;
  c.per_contribution.emplace_back("sql", std::move(v));
  return c;
}

double optimal_homodyne_angle(const PlantParams& params) {
  return std::atan2(1.0, k_sm_dc(params));
}

double enhancement_ratio(double omega_norm, double gamma_val) {
  if (!(omega_norm > 0.0)) throw ParameterError("enhancement_ratio needs omega > 0");
  const double w2 = omega_norm * omega_norm;
  const double u = w2 * (2.0 + w2);
  const double num = 2.0 * w2 * (1.0 + u * (2.0 + (1.0 + gamma_val) * u));
  const double den = (1.0 + w2) * (gamma_val + 4.0 * w2 * w2 * (1.0 + w2) * (1.0 + w2));
  return num / den;
}

double rho_squared(double gamma_val) { return 2.0 * std::sqrt(gamma_val); }

bool beats_sql(double gamma_val) { return gamma_val > 0.25; }

}  // namespace qnb
