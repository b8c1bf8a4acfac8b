#include "chemo/dynamics.hpp"

#include "chemo/numeric.hpp"

#include <algorithm>
#include <string>

namespace chemo {

NumericalBlowup::NumericalBlowup(double when)
    : std::runtime_error("numerical blow-up at t = " + std::to_string(when)),
      t(when) {}

PlantRates rhs(const PlantState& state, double dilution,
               const PlantParams& params) {
  if (state.b.size() != params.growths.size())
    throw std::invalid_argument("rhs: species count mismatch");
  PlantRates r;
  r.db.resize(state.b.size());
  double consumed = 0.0;
  for (size_t i = 0; i < state.b.size(); ++i) {
    const double mu = params.growths[i].value(state.s);
    consumed += mu * state.b[i];
    r.db[i] = (mu - dilution) * state.b[i];
  }
  r.ds = -consumed + dilution * (params.s_in - state.s);
  return r;
}

void apply_floors(PlantState& state, const PlantParams& params) {
  if (params.b_min > 0.0)
    for (double& b : state.b) b = std::max(b, params.b_min);
  if (state.s < 0.0 && state.s > -1e-9) state.s = 0.0;
  if (state.s > params.s_in && state.s < params.s_in + 1e-9)
    state.s = params.s_in;
  bool finite = std::isfinite(state.s);
  for (double b : state.b) finite = finite && std::isfinite(b);
  if (!finite || std::abs(state.s) > 10.0 * params.s_in)
    throw NumericalBlowup(state.t);
}

PlantState step(PlantState state, double dilution, const PlantParams& params,
                double h) {
  if (h <= 0.0) throw std::invalid_argument("step: h must be positive");
  const int nb = static_cast<int>(state.b.size());
  double y[8];
  y[0] = state.s;
  for (int i = 0; i < nb; ++i) y[1 + i] = state.b[i];
  auto deriv = [&](double, const double* v, double* dv) {
    // RK4 stages may poke microscopically outside [0, s_in]; clamp the
    // growth-law argument to its domain.
    const double s_eval = std::clamp(v[0], 0.0, params.s_in);
    double consumed = 0.0;
    for (int i = 0; i < nb; ++i) {
      const double mu = params.growths[i].value(s_eval);
      consumed += mu * v[1 + i];
      dv[1 + i] = (mu - dilution) * v[1 + i];
    }
    dv[0] = -consumed + dilution * (params.s_in - v[0]);
  };
  rk4_step(state.t, h, std::span<double>(y, 1 + nb), deriv);
  state.t += h;
  state.s = y[0];
  for (int i = 0; i < nb; ++i) state.b[i] = y[1 + i];
  apply_floors(state, params);
  return state;
}

double measure(const PlantState& state, const Disturbance& d) {
  return state.s * d.factor(state.t);
}

}  // namespace chemo
