#pragma once

#include <functional>

#include "chemo/control.hpp"

namespace chemo {

struct SettleConfig {
  double window = 20.0;            // check interval, in model time
  double improvement_ratio = 0.9;  // settled when std stops shrinking by this
  double max_time = 500.0;         // budget for one settlement run
  double tol = 1e-3;               // acceptance tolerance on |s_eq - s_ref|
};

struct SettleResult {
  double s_eq = 0.0;     // mean measured output over the last window
  double d_at_eq = 0.0;  // feedback evaluated at s_eq
  double elapsed = 0.0;
  bool settled = false;
  int windows = 0;
};

struct WindowStats {
  int index;
  double mean;
  double stddev;
};

// Runs the closed loop (simple law) in non-overlapping windows of measured
// output; the transient counts as settled at the first window whose standard
// deviation is no longer smaller than improvement_ratio times the previous
// window's. The mean over that window is the asymptotic output estimate. On
// timeout, settled is false and the last window's mean is returned.
SettleResult run_until_settled(
    ClosedLoop& loop, const SettleConfig& cfg, double h,
    const std::function<void(const WindowStats&)>& on_window = {});

// Identification residual: its root in d_ref marks d_ref = mu(s_ref).
inline double residual(double s_eq, double s_ref) { return s_eq - s_ref; }

}  // namespace chemo
