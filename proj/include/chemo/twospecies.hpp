#pragma once

#include <complex>

#include "chemo/reconstruct.hpp"

namespace chemo {

struct SaturationActive : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoReturn : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigenvalues of the closed loop linearized at the exclusion equilibrium
// (s_ref, b1 = 0, b2 = s_in - s_ref), where species 1 is absent and species 2
// sustains the culture. The input reference is mu2(s_ref), which must lie
// strictly inside (d_min, d_max) so the feedback is in its linear regime.
std::vector<std::complex<double>> eigs_excluded_closed_form(
    const GrowthFunction& f1, const GrowthFunction& f2, double s_ref,
    double s_in, const ControllerConfig& cfg, FeedbackLaw law);

// Same eigenvalues from a finite-difference Jacobian of the closed loop,
// via the characteristic polynomial. Independent cross-check of the closed
// forms.
std::vector<std::complex<double>> eigs_excluded_numerical(
    const GrowthFunction& f1, const GrowthFunction& f2, double s_ref,
    double s_in, const ControllerConfig& cfg, FeedbackLaw law,
    double fd_h = 1e-7);

// Reference value at which a slowly drifting run, started at s_start on the
// species-2 branch, sees species 1 recover to its initial concentration:
// the signed integral of (mu1 - mu2) / (sigma (s_in - sigma)) from s_start
// down to the returned value vanishes. Defined by quadrature alone.
struct DelayedLossOptions {
  double floor = 1e-6;     // integration never goes below this substrate level
  double quad_tol = 1e-10;
  int cells = 2000;
};

double delayed_loss_boundary(const GrowthFunction& f1, const GrowthFunction& f2,
                             double s_start, double s_in,
                             const DelayedLossOptions& opt = {});

// Discrete switching protocol: park where the target species dominates, jump
// to a probe reference pair, and read the dilution off the measured output at
// the detection event. Detection runs on a smoothed copy of the measured
// output after the probe horizon completes.
enum class ReadOff { stop_of_increase, inflection };

struct SwitchProtocol {
  ControllerState park;
  std::vector<ControllerState> probes;
  ReadOff read_off = ReadOff::stop_of_increase;
  int target_species = 0;  // which growth curve the estimates approximate

  double smoothing_window = 5.0;  // centered moving average span
  double slope_span = 0.5;        // half-stencil for the smoothed derivative
  double slope_band = 1e-4;       // arming/firing hysteresis on the derivative
  // A pi-wide second-difference stencil cancels both harmonics of the
  // biharmonic disturbance (frequencies 2 and 4) exactly, so the curvature
  // band can sit just above the rounding floor.
  double curvature_span = 3.14159265;  // stencil for the second difference
  double curvature_band = 1e-5;   // firing threshold on the second difference
  double skip_initial = 10.0;      // ignore the jump transient after a switch
  double probe_time = 250.0;       // horizon per probe
  double tail_window = 20.0;       // stationary fallback readout span
  double stationary_band = 5e-3;   // |slope| level counting as stationary
  double park_dwell = 0.0;         // extra hold at the park point
};

ReconstructedGraph run_switch_protocol(ClosedLoop& loop,
                                       const SwitchProtocol& protocol,
                                       const SettleConfig& settle, double h);

// Accuracy-versus-gain study with imperfect suppression: the protocol runs
// once per gain from the same initial state; errors are reported relative to
// the growth-rate gap. A zero gain turns feedback off, so those probes vary
// the input reference instead of the output reference.
struct GainStudyConfig {
  std::vector<double> gains;
  SwitchProtocol protocol;
  std::vector<double> d_probes_zero_gain;
};

struct GainStudyRow {
  double gain = 0.0;
  double s = 0.0;
  double mu_est = 0.0;
  double mu_target = 0.0;
  double mu_other = 0.0;
  double rel_error = 0.0;
  bool converged = true;
};

std::vector<GainStudyRow> gain_accuracy_study(
    const GainStudyConfig& gc, const PlantParams& plant, ControllerConfig cfg,
    const Disturbance& dist, const SettleConfig& settle,
    const PlantState& initial, double h);

}  // namespace chemo
