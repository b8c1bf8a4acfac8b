#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chemo/growth.hpp"

namespace chemo {

struct PlantParams {
  double s_in = 1.0;                    // inflow substrate concentration
  std::vector<GrowthFunction> growths;  // one or two competing species
  double b_min = 0.0;                   // suppression floor, 0 = ideal model
};

struct PlantState {
  double t = 0.0;
  double s = 0.0;
  std::vector<double> b;
};

struct PlantRates {
  double ds = 0.0;
  std::vector<double> db;
};

// Multiplicative biharmonic disturbance on the measured output; amplitude 0
// turns it off. Only measurements are affected, never the true state.
struct Disturbance {
  double amplitude = 0.0;
  double freq1 = 3.0;
  double freq2 = 1.0;
  double factor(double t) const {
    return 1.0 + amplitude * std::cos(freq1 * t) * std::sin(freq2 * t);
  }
};

struct NumericalBlowup : std::runtime_error {
  explicit NumericalBlowup(double when);
  double t;
};

// Chemostat right-hand side at constant dilution:
//   ds/dt = -sum_i mu_i(s) b_i + D (s_in - s),  db_i/dt = (mu_i(s) - D) b_i.
PlantRates rhs(const PlantState& state, double dilution,
               const PlantParams& params);

// One RK4 step at constant dilution, then the b_min floor and a clamp of s
// back into [0, s_in] for excursions smaller than 1e-9.
PlantState step(PlantState state, double dilution, const PlantParams& params,
                double h);

double measure(const PlantState& state, const Disturbance& d);

// Shared post-step housekeeping (floor, clamp, blow-up detection).
void apply_floors(PlantState& state, const PlantParams& params);

}  // namespace chemo
