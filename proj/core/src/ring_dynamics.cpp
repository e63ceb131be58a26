#include "ringrc/ring_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>
#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

RingParams RingParams::silicon_default() {
  RingParams p;
  // Silicon estimates for a 7 um ring (TPA, free-carrier dispersion, thermo-optic
  // coefficient, heat capacity of the mode volume, linear and free-carrier
  // absorption), all scaled by the strength that puts the on-resonance
  // self-pulsing onset at 16 dBm.
  constexpr double strength = 0.1597;
  p.g_tpa = 8.1e34 * strength;
  p.k_fcd = 26e9 * strength;
  p.k_th = 9.3e9 * strength;
  p.h_abs = 6.2e10 * strength;
  p.c_lin = 1.6e9;
  p.c_fca = 1.0e10;
  return p;
}

double RingParams::photon_lifetime() const { return q_loaded / (two_pi * f0_hz); }

void RingParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(fmt::format("ring parameter invalid: {}", what));
  };
  require(std::isfinite(f0_hz) && f0_hz > 0.0, "f0 must be > 0");
  require(std::isfinite(q_loaded) && q_loaded > 0.0, "Q_loaded must be > 0");
  require(eta_drop > 0.0 && eta_drop < 1.0, "eta_drop must lie in (0, 1)");
  require(eta_in > 0.0 && eta_in < 1.0, "eta_in must lie in (0, 1)");
  require(eta_in + eta_drop <= 1.0, "eta_in + eta_drop must not exceed 1");
  require(std::isfinite(tau_fc_s) && tau_fc_s > 0.0, "tau_fc must be > 0");
  require(std::isfinite(tau_th_s) && tau_th_s > 0.0, "tau_th must be > 0");
  for (double c : {g_tpa, k_fcd, k_th, h_abs, c_lin, c_fca})
    require(std::isfinite(c) && c >= 0.0, "nonlinear coefficients must be finite and >= 0");
  require(std::isfinite(coupling_loss_db) && coupling_loss_db >= 0.0, "coupling_loss_db must be >= 0");
}

std::vector<std::string> RingParams::warnings() const {
  std::vector<std::string> out;
  const double tau_ph = photon_lifetime();
  if (tau_fc_s < 10.0 * tau_ph)
    out.push_back(fmt::format("tau_fc ({:.3g} s) is within a factor 10 of tau_ph ({:.3g} s)", tau_fc_s, tau_ph));
  if (tau_th_s < 10.0 * tau_fc_s)
    out.push_back(fmt::format("tau_th ({:.3g} s) is within a factor 10 of tau_fc ({:.3g} s)", tau_th_s, tau_fc_s));
  return out;
}

RingParams RingParams::with_nonlinear_scale(double scale) const {
  RingParams p = *this;
  p.g_tpa *= scale;
  p.k_fcd *= scale;
  p.k_th *= scale;
  p.h_abs *= scale;
  return p;
}

bool RingParams::is_linear() const {
  const bool no_carrier_shift = g_tpa == 0.0 || k_fcd == 0.0;
  const bool no_thermal_shift = k_th == 0.0 || h_abs == 0.0 || (c_lin == 0.0 && (c_fca == 0.0 || g_tpa == 0.0));
  return no_carrier_shift && no_thermal_shift;
}

double SolverSettings::resolved_max_step(const RingParams& p) const {
  return max_step_s > 0.0 ? max_step_s : p.photon_lifetime() / 4.0;
}

void SolverSettings::validate() const {
  if (!(max_step_s >= 0.0) || !std::isfinite(max_step_s)) throw ConfigError("solver max_step_s must be >= 0");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("solver rel_tol must lie in (0, 1)");
}

double linear_transmission(double detuning_hz, const RingParams& p) {
  const double half = 0.5 * p.decay_rate();
  const double w = two_pi * detuning_hz;
  return p.gamma_in() * p.gamma_drop() / (half * half + w * w);
}

double linear_through_transmission(double detuning_hz, const RingParams& p) {
  const Complex denom(0.5 * p.decay_rate(), -two_pi * detuning_hz);
  return std::norm(1.0 - p.gamma_in() / denom);
}

double linear_stored_energy(double input_power_w, double detuning_hz, const RingParams& p) {
  const double half = 0.5 * p.decay_rate();
  const double w = two_pi * detuning_hz;
  return p.gamma_in() * input_power_w / (half * half + w * w);
}

double nonlinear_shift(const RingState& s, const RingParams& p) { return p.k_fcd * s.n_fc - p.k_th * s.dT; }

RingState state_derivative(const RingState& s, Complex input_field, double laser_detuning_hz,
                           const RingParams& p) {
  const double energy = std::norm(s.a);
  const double phase_rate = two_pi * (laser_detuning_hz - nonlinear_shift(s, p));
  RingState d;
  d.a = Complex(-0.5 * p.decay_rate(), phase_rate) * s.a + std::sqrt(p.gamma_in()) * input_field;
  d.n_fc = -s.n_fc / p.tau_fc_s + p.g_tpa * energy * energy;
  d.dT = -s.dT / p.tau_th_s + p.h_abs * (p.c_lin * energy + p.c_fca * s.n_fc * energy);
  return d;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

RingIntegrator::RingIntegrator(const RingParams& p, double laser_detuning_hz, const SolverSettings& solver,
                               double sample_rate, const RingState& initial)
    : dt_(1.0 / sample_rate),
      h_max_(solver.resolved_max_step(p)),
      rtol_(solver.rel_tol),
      half_decay_(0.5 * p.decay_rate()),
      two_pi_det_(two_pi * laser_detuning_hz),
      two_pi_kfcd_(two_pi * p.k_fcd),
      two_pi_kth_(two_pi * p.k_th),
      kappa_(std::sqrt(p.gamma_in())),
      kappa_drop_(std::sqrt(p.gamma_drop())),
      inv_tau_fc_(1.0 / p.tau_fc_s),
      g_tpa_(p.g_tpa),
      inv_tau_th_(1.0 / p.tau_th_s),
      h_lin_(p.h_abs * p.c_lin),
      h_fca_(p.h_abs * p.c_fca),
      y_{initial.a.real(), initial.a.imag(), std::max(0.0, initial.n_fc), initial.dT},
      h_(h_max_) {
  p.validate();
  solver.validate();
  if (!(sample_rate > 0.0)) throw ConfigError("integrator sample rate must be positive");
  scale_a_ = std::hypot(y_[0], y_[1]);
  scale_n_ = y_[2];
  scale_t_ = std::abs(y_[3]);
}

RingState RingIntegrator::state() const { return RingState{Complex(y_[0], y_[1]), y_[2], y_[3]}; }

RingIntegrator::Vec RingIntegrator::rhs(const Vec& y, Complex in) const {
  const double energy = y[0] * y[0] + y[1] * y[1];
  const double w = two_pi_det_ - two_pi_kfcd_ * y[2] + two_pi_kth_ * y[3];
  return {-half_decay_ * y[0] - w * y[1] + kappa_ * in.real(),
          w * y[0] - half_decay_ * y[1] + kappa_ * in.imag(),
          -inv_tau_fc_ * y[2] + g_tpa_ * energy * energy,
          -inv_tau_th_ * y[3] + (h_lin_ + h_fca_ * y[2]) * energy};
}

void RingIntegrator::advance(Complex s0, Complex s1) {
  const double dt = dt_;
  const Complex ds = (s1 - s0) / dt;
  auto drive = [&](double tau) { return s0 + ds * tau; };
  auto comb = [](const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec out = y;
    for (const auto& [c, k] : terms)
      for (int i = 0; i < 4; ++i) out[i] += h * c * (*k)[i];
    return out;
  };
  auto fail = [&](double tau) { throw NonFiniteState(index_, static_cast<double>(index_) * dt + tau); };

  double tau = 0.0;
  while (tau < dt) {
    double step = std::min(h_, h_max_);
    bool last = false;
    if (tau + step >= dt * (1.0 - 1e-12)) {
      step = dt - tau;
      last = true;
    }
    const Vec& k1 = k1_;
    const Vec k2 = rhs(comb(y_, step, {{a21, &k1}}), drive(tau + c2 * step));
    const Vec k3 = rhs(comb(y_, step, {{a31, &k1}, {a32, &k2}}), drive(tau + c3 * step));
    const Vec k4 = rhs(comb(y_, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), drive(tau + c4 * step));
    const Vec k5 = rhs(comb(y_, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), drive(tau + c5 * step));
    const Vec k6 =
        rhs(comb(y_, step, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), drive(tau + step));
    const Vec y_new = comb(y_, step, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const Vec k7 = rhs(y_new, drive(tau + step));

    Vec err;
    for (int i = 0; i < 4; ++i)
      err[i] = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double mag_a = std::max(std::hypot(y_[0], y_[1]), std::hypot(y_new[0], y_new[1]));
    const double tol_a = rtol_ * std::max(mag_a, scale_a_) + 1e-300;
    const double tol_n = rtol_ * std::max({std::abs(y_[2]), std::abs(y_new[2]), scale_n_}) + 1e-300;
    const double tol_t = rtol_ * std::max({std::abs(y_[3]), std::abs(y_new[3]), scale_t_}) + 1e-300;
    const double err_norm =
        std::max({std::hypot(err[0], err[1]) / tol_a, std::abs(err[2]) / tol_n, std::abs(err[3]) / tol_t});

    const bool finite = std::isfinite(err_norm) && std::isfinite(y_new[0]) && std::isfinite(y_new[1]) &&
                        std::isfinite(y_new[2]) && std::isfinite(y_new[3]);
    if (!finite) {
      ++rejected_;
      if (step <= 1e-6 * h_max_) fail(tau);
      h_ = 0.2 * step;
      continue;
    }
    if (err_norm > 1.0) {
      ++rejected_;
      h_ = step * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      if (h_ < 1e-9 * h_max_) fail(tau);
      continue;
    }

    tau = last ? dt : tau + step;
    y_ = y_new;
    k1_ = k7;
    if (y_[2] < 0.0) {
      y_[2] = 0.0;
      k1_ = rhs(y_, drive(tau));
    }
    scale_a_ = std::max(scale_a_, std::hypot(y_[0], y_[1]));
    scale_n_ = std::max(scale_n_, y_[2]);
    scale_t_ = std::max(scale_t_, std::abs(y_[3]));
    ++steps_;
    const double grow = err_norm > 0.0 ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
    // A clipped final step says nothing about the natural step length.
    if (!last || grow < 1.0) h_ = std::min(h_max_, step * std::clamp(grow, 0.2, 5.0));
  }
}

void RingIntegrator::observe_drive(Complex s) {
  // Error floors follow the steady state the drive could reach on resonance.
  const double a = kappa_ * std::abs(s) / half_decay_;
  if (a <= drive_a_) return;
  drive_a_ = a;
  const double u = a * a;
  const double n = g_tpa_ * u * u / inv_tau_fc_;
  scale_a_ = std::max(scale_a_, a);
  scale_n_ = std::max(scale_n_, n);
  scale_t_ = std::max(scale_t_, (h_lin_ + h_fca_ * n) * u / inv_tau_th_);
}

void RingIntegrator::process(std::span<const Complex> in, std::span<Complex> through, std::span<Complex> drop,
                             std::span<double> carriers, std::span<double> temperature) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    observe_drive(in[i]);
    if (!started_) {
      k1_ = rhs(y_, in[i]);
      started_ = true;
    } else {
      advance(prev_in_, in[i]);
      ++index_;
    }
    prev_in_ = in[i];
    const Complex a(y_[0], y_[1]);
    through[i] = in[i] - kappa_ * a;
    drop[i] = kappa_drop_ * a;
    if (!carriers.empty()) carriers[i] = y_[2];
    if (!temperature.empty()) temperature[i] = y_[3];
  }
}

RingResponse integrate_trace(const OpticalWaveform& input, double laser_detuning_hz, const RingParams& p,
                             const SolverSettings& solver, const RingState& initial) {
  if (!input.is_field()) throw ConfigError("integrate_trace requires a complex-field input waveform");
  const auto in = input.field();
  const std::size_t n = in.size();
  RingIntegrator integ(p, laser_detuning_hz, solver, input.sample_rate(), initial);
  std::vector<Complex> through(n), drop(n);
  RingResponse r;
  r.carriers.resize(n);
  r.temperature.resize(n);
  integ.process(in, through, drop, r.carriers, r.temperature);
  r.final_state = integ.state();
  r.steps = integ.steps();
  r.rejected_steps = integ.rejected_steps();
  r.through = OpticalWaveform::from_field(std::move(through), input.sample_rate(), input.t0());
  r.drop = OpticalWaveform::from_field(std::move(drop), input.sample_rate(), input.t0());
  return r;
}

SelfPulsingReport detect_self_pulsing(const OpticalWaveform& output, double window_s, double min_window_s) {
  if (!output.is_power()) throw ConfigError("detect_self_pulsing expects a power waveform");
  if (!(window_s >= min_window_s))
    throw ConfigError(fmt::format("window too short: {:.3g} s < required {:.3g} s", window_s, min_window_s));
  const auto samples = output.power();
  const auto n = static_cast<std::size_t>(std::llround(window_s * output.sample_rate()));
  if (n > samples.size() || n < 16)
    throw ConfigError(fmt::format("window too short: trace holds {:.3g} s, window needs {:.3g} s",
                                  output.duration(), window_s));
  const auto tail = samples.subspan(samples.size() - n);

  SelfPulsingReport rep;
  double mean = 0.0, lo = tail[0], hi = tail[0];
  for (double v : tail) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(n);
  if (!(mean > 0.0)) return rep;
  rep.relative_peak_to_peak = (hi - lo) / mean;

  std::vector<double> buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    buf[i] = (tail[i] - mean) * hann;
  }
  std::vector<fftw_complex> spec(n / 2 + 1);
  // Only fftw_execute is thread-safe; planning and destruction are serialized.
  static std::mutex planner;
  fftw_plan plan;
  {
    std::lock_guard lock(planner);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.data(), spec.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner);
    fftw_destroy_plan(plan);
  }

  std::vector<double> psd;
  psd.reserve(n / 2);
  std::size_t peak = 1;
  double peak_val = 0.0;
  // Skip the bins leaking from the mean removal.
  for (std::size_t k = 2; k <= n / 2; ++k) {
    const double v = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    psd.push_back(v);
    if (v > peak_val) {
      peak_val = v;
      peak = k;
    }
  }
  if (psd.empty() || !(peak_val > 0.0)) return rep;
  auto mid = psd.begin() + static_cast<std::ptrdiff_t>(psd.size() / 2);
  std::nth_element(psd.begin(), mid, psd.end());
  const double floor = std::max(*mid, 1e-300);
  rep.line_contrast_db = 10.0 * std::log10(peak_val / floor);
  rep.dominant_freq_hz = static_cast<double>(peak) * output.sample_rate() / static_cast<double>(n);
  rep.is_pulsing = rep.relative_peak_to_peak > 0.1 && rep.line_contrast_db >= 10.0;
  return rep;
}

SelfPulsingReport cw_self_pulsing(const RingParams& p, double power_dbm, double detuning_hz,
                                  const CalibrationSettings& cs) {
  const double total = cs.transient_s + cs.window_s;
  const auto n = static_cast<std::size_t>(std::ceil(total * cs.sample_rate)) + 1;
  const double watts = dbm_to_watt(power_dbm - p.coupling_loss_db);
  std::vector<Complex> drive(n, Complex(std::sqrt(watts), 0.0));
  const auto in = OpticalWaveform::from_field(std::move(drive), cs.sample_rate);
  const auto resp = integrate_trace(in, detuning_hz, p, cs.solver);
  const auto out = OpticalWaveform::from_power(resp.through.intensity(), cs.sample_rate);
  return detect_self_pulsing(out, cs.window_s, 10.0 * p.tau_th_s);
}

std::optional<double> self_pulsing_threshold(const RingParams& p, const CalibrationSettings& cs) {
  auto pulses = [&](double dbm) { return cw_self_pulsing(p, dbm, cs.detuning_hz, cs).is_pulsing; };
  std::optional<double> first;
  for (double dbm = cs.min_power_dbm; dbm <= cs.max_power_dbm + 1e-9; dbm += 1.0) {
    if (pulses(dbm)) {
      first = dbm;
      break;
    }
  }
  if (!first) return std::nullopt;
  if (*first <= cs.min_power_dbm) return first;
  double lo = *first - 1.0, hi = *first;
  while (hi - lo > cs.power_resolution_db) {
    const double mid = 0.5 * (lo + hi);
    (pulses(mid) ? hi : lo) = mid;
  }
  return hi;
}

CalibrationResult calibrate_nonlinear(const RingParams& p, const CalibrationSettings& cs) {
  p.validate();
  auto within = [&](std::optional<double> thr) {
    return thr && std::abs(*thr - cs.target_power_dbm) <= cs.tolerance_db;
  };
  const auto thr1 = self_pulsing_threshold(p, cs);
  if (within(thr1)) return {p, 1.0, *thr1};
  if (p.is_linear()) throw CalibrationFailed("linear ring never self-pulses: no threshold in the power range");

  auto pulses_at_target = [&](double s) {
    return cw_self_pulsing(p.with_nonlinear_scale(s), cs.target_power_dbm, cs.detuning_hz, cs).is_pulsing;
  };

  // Bracket [lo, hi]: lo does not pulse at the target power, hi does.
  double lo = 1.0, hi = 1.0;
  const bool too_strong = thr1 && *thr1 < cs.target_power_dbm && pulses_at_target(1.0);
  int guard = 0;
  if (too_strong) {
    do {
      lo *= 0.5;
      if (++guard > 40) throw CalibrationFailed("could not weaken nonlinearity below the self-pulsing onset");
    } while (pulses_at_target(lo));
    hi = 2.0 * lo;
  } else {
    do {
      hi *= 2.0;
      if (++guard > 40) throw CalibrationFailed("no self-pulsing found at the target power for any scale");
    } while (!pulses_at_target(hi));
    lo = 0.5 * hi;
  }
  while (hi / lo > 1.0 + 2e-3) {
    const double mid = std::sqrt(lo * hi);
    (pulses_at_target(mid) ? hi : lo) = mid;
  }
  const RingParams scaled = p.with_nonlinear_scale(hi);
  const auto thr = self_pulsing_threshold(scaled, cs);
  if (!within(thr))
    throw CalibrationFailed(fmt::format("self-pulsing threshold {} dBm missed target {} +/- {} dB after scaling by {:.4g}",
                                        thr ? fmt::format("{:.2f}", *thr) : std::string("none"),
                                        cs.target_power_dbm, cs.tolerance_db, hi));
  return {scaled, hi, *thr};
}

}  // namespace ringrc
