#include "chemo/control.hpp"

#include "chemo/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace chemo {

ClosedLoop::ClosedLoop(PlantParams plant, ControllerConfig cfg, FeedbackLaw law,
                       Disturbance dist, PlantState initial,
                       ControllerState refs, double drift)
    : plant_(std::move(plant)),
      cfg_(cfg),
      law_(law),
      dist_(dist),
      drift_(drift),
      state_(std::move(initial)),
      refs_(refs) {
  if (plant_.growths.empty() || plant_.growths.size() > 2)
    throw std::invalid_argument("closed loop: need one or two species");
  if (state_.b.size() != plant_.growths.size())
    throw std::invalid_argument("closed loop: species count mismatch");
}

void ClosedLoop::advance(double h) {
  const int nb = static_cast<int>(state_.b.size());
  const bool adapt = law_ == FeedbackLaw::dynamic_adapt;
  const bool drifting = drift_ != 0.0;
  const int id = 1 + nb;
  const int is = id + (adapt ? 1 : 0);
  const int n = is + (drifting ? 1 : 0);

  double y[8];
  y[0] = state_.s;
  for (int i = 0; i < nb; ++i) y[1 + i] = state_.b[i];
  if (adapt) y[id] = refs_.d_ref;
  if (drifting) y[is] = refs_.s_ref;

  auto deriv = [&](double t, const double* v, double* dv) {
    const double s = v[0];
    const double d_ref = adapt ? v[id] : refs_.d_ref;
    const double s_ref = drifting ? v[is] : refs_.s_ref;
    const double s_meas = s * dist_.factor(t);
    const double d =
        saturate(d_ref - cfg_.gain_prop * (s_meas - s_ref), cfg_.d_min,
                 cfg_.d_max);
    const double s_eval = std::clamp(s, 0.0, plant_.s_in);
    double consumed = 0.0;
    for (int i = 0; i < nb; ++i) {
      const double mu = plant_.growths[i].value(s_eval);
      consumed += mu * v[1 + i];
      dv[1 + i] = (mu - d) * v[1 + i];
    }
    dv[0] = -consumed + d * (plant_.s_in - s);
    if (adapt)
      dv[id] = -cfg_.gain_adapt * (s_meas - s_ref) * (d_ref - cfg_.d_min) *
               (cfg_.d_max - d_ref);
    if (drifting) dv[is] = drift_ * s_ref * (plant_.s_in - s_ref);
  };

  rk4_step(state_.t, h, std::span<double>(y, n), deriv);
  state_.t += h;
  state_.s = y[0];
  for (int i = 0; i < nb; ++i) state_.b[i] = y[1 + i];
  if (adapt) refs_.d_ref = y[id];
  if (drifting) refs_.s_ref = y[is];
  apply_floors(state_, plant_);
  if (observer_) observer_(*this);
}

void ClosedLoop::run_for(double duration, double h) {
  const long n = std::lround(duration / h);
  for (long i = 0; i < n; ++i) advance(h);
}

}  // namespace chemo
