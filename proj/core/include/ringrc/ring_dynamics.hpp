#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringrc/waveform.hpp"

namespace ringrc {

/// Physical constants of the add-drop microring and its nonlinearities.
///
/// Energy decay rates (1/s) are split as
///   1/tau_ph = gamma_in + gamma_drop + gamma_intrinsic,
/// with gamma_in = eta_in / tau_ph and gamma_drop = eta_drop / tau_ph.
/// Both buses sit at the same gap, so eta_in defaults to eta_drop.
///
/// Sign convention for the resonance shift: positive values move the
/// resonance to higher frequency. Free carriers shift it up (blue), heating
/// shifts it down (red). k_fcd and k_th are stored as positive magnitudes.
struct RingParams {
  double f0_hz = 193.5e12;
  double q_loaded = 6.0e3;
  double eta_drop = 0.45;
  double eta_in = 0.45;
  double tau_fc_s = 3.0e-9;
  double tau_th_s = 100.0e-9;

  // Carriers are counted in units of 1e17 cm^-3 of electron-hole pairs.
  double g_tpa = 0.0;   // units / s per J^2 of stored energy
  double k_fcd = 0.0;   // Hz of blue shift per carrier unit
  double k_th = 0.0;    // Hz of red shift per K
  double h_abs = 0.0;   // K / J (inverse heat capacity)
  double c_lin = 0.0;   // linear absorption rate, 1/s
  double c_fca = 0.0;   // free-carrier absorption rate per carrier unit, 1/s

  double coupling_loss_db = 0.0;

  /// Calibrated silicon defaults (self-pulsing onset near 16 dBm on resonance).
  static RingParams silicon_default();

  double photon_lifetime() const;   // Q / (2 pi f0)
  double decay_rate() const { return 1.0 / photon_lifetime(); }
  double linewidth_hz() const { return f0_hz / q_loaded; }
  double gamma_in() const { return eta_in * decay_rate(); }
  double gamma_drop() const { return eta_drop * decay_rate(); }

  /// Throws ConfigError on violated invariants.
  void validate() const;
  /// Human-readable warnings for weak timescale separation
  /// (tau_ph, tau_fc, tau_th less than a factor 10 apart).
  std::vector<std::string> warnings() const;

  /// Multiplies g_tpa, k_fcd, k_th and h_abs by `scale`.
  RingParams with_nonlinear_scale(double scale) const;
  RingParams linearized() const { return with_nonlinear_scale(0.0); }
  bool is_linear() const;
};

struct RingState {
  Complex a{};        // |a|^2 is stored energy in J
  double n_fc = 0.0;  // carrier units
  double dT = 0.0;    // K
};

struct SolverSettings {
  double max_step_s = 0.0;  // 0 selects tau_ph / 4
  double rel_tol = 1e-6;

  double resolved_max_step(const RingParams& p) const;
  void validate() const;
};

/// Drop-port power ratio of the cold ring; Lorentzian of FWHM f0/Q.
double linear_transmission(double detuning_hz, const RingParams& p);
/// Through-port power ratio of the cold ring.
double linear_through_transmission(double detuning_hz, const RingParams& p);
/// Steady stored energy for CW input power (W) in the cold ring.
double linear_stored_energy(double input_power_w, double detuning_hz, const RingParams& p);

/// Resonance shift in Hz, positive toward higher frequency.
double nonlinear_shift(const RingState& s, const RingParams& p);

/// Temporal coupled-mode equations:
///   da/dt  = [i 2 pi (laser_detuning - shift) - 1/(2 tau_ph)] a + sqrt(gamma_in) s_in
///   dn/dt  = -n / tau_fc + g_tpa |a|^4
///   dT'/dt = -dT / tau_th + h_abs (c_lin |a|^2 + c_fca n |a|^2)
/// with s_in the input field amplitude (|s_in|^2 in W).
RingState state_derivative(const RingState& s, Complex input_field, double laser_detuning_hz,
                           const RingParams& p);

struct RingResponse {
  OpticalWaveform through;
  OpticalWaveform drop;
  std::vector<double> carriers;     // n_fc at each sample
  std::vector<double> temperature;  // dT at each sample
  RingState final_state;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
};

/// Adaptive Dormand-Prince 5(4) integration of the coupled-mode equations,
/// fed one chunk of input samples at a time. Output sample k is the state
/// at the instant of input sample k; the drive is linearly interpolated in
/// between. Carriers are clamped at zero after every accepted step.
class RingIntegrator {
 public:
  RingIntegrator(const RingParams& p, double laser_detuning_hz, const SolverSettings& solver, double sample_rate,
                 const RingState& initial = {});

  /// Consumes `in`; through/drop (and the optional carrier/temperature
  /// spans) receive one value per input sample.
  void process(std::span<const Complex> in, std::span<Complex> through, std::span<Complex> drop,
               std::span<double> carriers = {}, std::span<double> temperature = {});

  RingState state() const;
  std::size_t steps() const { return steps_; }
  std::size_t rejected_steps() const { return rejected_; }

 private:
  using Vec = std::array<double, 4>;
  Vec rhs(const Vec& y, Complex in) const;
  void advance(Complex s0, Complex s1);
  void observe_drive(Complex s);

  double dt_, h_max_, rtol_;
  double half_decay_, two_pi_det_, two_pi_kfcd_, two_pi_kth_, kappa_, kappa_drop_;
  double inv_tau_fc_, g_tpa_, inv_tau_th_, h_lin_, h_fca_;
  Vec y_{};
  Vec k1_{};
  double h_;
  double scale_a_ = 0.0, scale_n_ = 0.0, scale_t_ = 0.0;
  double drive_a_ = 0.0;
  bool started_ = false;
  Complex prev_in_{};
  std::size_t index_ = 0;
  std::size_t steps_ = 0, rejected_ = 0;
};

/// Integrates the ring driven by a complex input field. Output samples are
/// taken at the input sample instants; the input is linearly interpolated
/// between samples. Throws NonFiniteState when the state blows up and
/// ConfigError for power-valued input.
RingResponse integrate_trace(const OpticalWaveform& input, double laser_detuning_hz,
                             const RingParams& p, const SolverSettings& solver = {},
                             const RingState& initial = {});

struct SelfPulsingReport {
  bool is_pulsing = false;
  double dominant_freq_hz = 0.0;
  double relative_peak_to_peak = 0.0;
  double line_contrast_db = 0.0;
};

/// Inspects the trailing `window_s` of a power trace. Pulsing requires a
/// peak-to-peak excursion above 10 % of the mean and a spectral line at least
/// 10 dB above the median spectral floor. Throws ConfigError (window too
/// short) when window_s < min_window_s or the trace is shorter than window_s.
SelfPulsingReport detect_self_pulsing(const OpticalWaveform& output, double window_s,
                                      double min_window_s);

struct CalibrationSettings {
  double target_power_dbm = 16.0;
  double tolerance_db = 1.0;
  double detuning_hz = 0.0;
  double min_power_dbm = 0.0;
  double max_power_dbm = 30.0;
  double sample_rate = 2.0e9;
  double transient_s = 1.0e-6;
  double window_s = 1.0e-6;
  double power_resolution_db = 0.05;
  SolverSettings solver{};
};

/// Runs a CW drive and reports whether the through-port output self-pulses.
SelfPulsingReport cw_self_pulsing(const RingParams& p, double power_dbm, double detuning_hz,
                                  const CalibrationSettings& cs);

/// Lowest in-waveguide power (dBm) in [min, max] at which the CW response
/// pulses; nullopt when it never does.
std::optional<double> self_pulsing_threshold(const RingParams& p, const CalibrationSettings& cs);

struct CalibrationResult {
  RingParams params;
  double scale = 1.0;
  double threshold_dbm = 0.0;
};

/// Scales the four nonlinear coefficients by one global factor so the
/// self-pulsing threshold lands within target +/- tolerance. Throws
/// CalibrationFailed when no threshold exists in the power range.
CalibrationResult calibrate_nonlinear(const RingParams& p, const CalibrationSettings& cs = {});

}  // namespace ringrc
