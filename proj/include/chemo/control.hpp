#pragma once

#include <functional>

#include "chemo/dynamics.hpp"

namespace chemo {

struct ControllerConfig {
  double d_min = 0.02;
  double d_max = 0.2;
  double gain_prop = 1.0;   // gain on the output error in the dilution command
  double gain_adapt = 0.0;  // gain of the reference-input adaptation law
  double s_min = 0.0;       // lower admissible bound for the output reference
};

struct ControllerState {
  double s_ref = 0.0;  // output reference
  double d_ref = 0.0;  // input reference
};

enum class FeedbackLaw { simple, dynamic_adapt };

inline double saturate(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Saturated proportional law: D = sat(d_ref - gain * (s - s_ref)). Vanishes
// to d_ref exactly at s = s_ref, so the stabilized state is an equilibrium of
// the open-loop plant.
inline double simple_feedback(double s_measured, const ControllerState& ref,
                              const ControllerConfig& cfg) {
  return saturate(ref.d_ref - cfg.gain_prop * (s_measured - ref.s_ref),
                  cfg.d_min, cfg.d_max);
}

// d(d_ref)/dt of the adaptive law; the logistic factors pin d_ref strictly
// inside (d_min, d_max) once initialized there.
inline double adapt_rate(double s_measured, const ControllerState& ref,
                         const ControllerConfig& cfg) {
  return -cfg.gain_adapt * (s_measured - ref.s_ref) * (ref.d_ref - cfg.d_min) *
         (cfg.d_max - ref.d_ref);
}

// d(s_ref)/dt of the slow reference drift; the sign of rate picks the
// exploration direction.
inline double drift_rate(double s_ref, double rate, double s_in) {
  return rate * s_ref * (s_in - s_ref);
}

// Plant plus controller integrated as one augmented ODE with a shared RK4
// step. The adapted input reference (dynamic law) and the drifting output
// reference are additional state components; the measured (disturbed) output
// is what both feedback terms see, evaluated at sub-stage times.
class ClosedLoop {
 public:
  ClosedLoop(PlantParams plant, ControllerConfig cfg, FeedbackLaw law,
             Disturbance dist, PlantState initial, ControllerState refs,
             double drift = 0.0);

  void advance(double h);
  void run_for(double duration, double h);

  const PlantState& state() const { return state_; }
  const ControllerState& refs() const { return refs_; }
  void set_refs(const ControllerState& r) { refs_ = r; }

  double time() const { return state_.t; }
  double measured() const { return measure(state_, dist_); }
  double dilution() const { return simple_feedback(measured(), refs_, cfg_); }

  FeedbackLaw law() const { return law_; }
  double drift() const { return drift_; }
  const PlantParams& plant() const { return plant_; }
  const ControllerConfig& config() const { return cfg_; }
  const Disturbance& disturbance() const { return dist_; }

  // Called after every accepted step; used by the scenario recorder.
  void set_observer(std::function<void(const ClosedLoop&)> obs) {
    observer_ = std::move(obs);
  }

 private:
  PlantParams plant_;
  ControllerConfig cfg_;
  FeedbackLaw law_;
  Disturbance dist_;
  double drift_;
  PlantState state_;
  ControllerState refs_;
  std::function<void(const ClosedLoop&)> observer_;
};

}  // namespace chemo
