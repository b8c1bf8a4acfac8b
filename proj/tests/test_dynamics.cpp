#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "chemo/dynamics.hpp"

#include <cmath>
#include <random>

using namespace chemo;

namespace {

PlantParams haldane_plant(double b_min = 0.0) {
  return {1.0, {GrowthFunction::haldane(1.0, 1.0, 10.0)}, b_min};
}

}  // namespace

TEST_CASE("right-hand side of the chemostat") {
  const auto plant = haldane_plant();

  // At s = s_in the dilution term vanishes, only consumption remains.
  PlantState st{0.0, 1.0, {0.37}};
  auto r = rhs(st, 0.13, plant);
  CHECK(r.ds == doctest::Approx(-plant.growths[0].value(1.0) * 0.37));

  // No biomass: pure inflow relaxation.
  st = {0.0, 0.3, {0.0}};
  r = rhs(st, 0.1, plant);
  CHECK(r.ds == doctest::Approx(0.07).epsilon(1e-14));
  CHECK(r.db[0] == 0.0);

  // mu(s) = D with b = s_in - s is an equilibrium.
  const double s_eq = 0.2;
  const double d = plant.growths[0].value(s_eq);
  st = {0.0, s_eq, {plant.s_in - s_eq}};
  r = rhs(st, d, plant);
  CHECK(r.ds == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.db[0] == doctest::Approx(0.0).epsilon(1e-15));

  CHECK_THROWS_AS(rhs(PlantState{0.0, 0.3, {0.1, 0.2}}, 0.1, plant),
                  std::invalid_argument);
}

TEST_CASE("integrator is stationary at equilibria") {
  const auto plant = haldane_plant();
  const double s_eq = 0.2;
  const double d = plant.growths[0].value(s_eq);
  const PlantState st{0.0, s_eq, {plant.s_in - s_eq}};
  const PlantState next = step(st, d, plant, 0.01);
  CHECK(std::abs(next.s - st.s) < 1e-14);
  CHECK(std::abs(next.b[0] - st.b[0]) < 1e-14);
}

TEST_CASE("suppression floor is applied after each step") {
  const auto plant = haldane_plant(1e-3);
  // Washout conditions: biomass just above the floor keeps decaying.
  PlantState st{0.0, 0.9, {1.0001e-3}};
  st = step(st, 0.2, plant, 0.01);
  CHECK(st.b[0] >= 1e-3);
  for (int i = 0; i < 200; ++i) st = step(st, 0.2, plant, 0.01);
  CHECK(st.b[0] == 1e-3);
}

TEST_CASE("one-step error drops ~16x when the step is halved") {
  const auto plant = haldane_plant();
  const PlantState st{0.0, 0.3, {0.7}};
  const double d = 0.1;
  auto integrate = [&](double h, double T) {
    PlantState x = st;
    const long n = std::lround(T / h);
    for (long i = 0; i < n; ++i) x = step(x, d, plant, h);
    return x;
  };
  const PlantState ref = integrate(0.0005, 2.0);  // much finer reference
  const double e1 = std::abs(integrate(0.08, 2.0).s - ref.s);
  const double e2 = std::abs(integrate(0.04, 2.0).s - ref.s);
  CHECK(e1 > 1e-13);  // above the rounding floor, so the ratio is meaningful
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 24.0);
}

TEST_CASE("measured output") {
  const Disturbance none;
  CHECK(measure({3.0, 0.42, {}}, none) == 0.42);

  const Disturbance d{0.05, 3.0, 1.0};
  CHECK(measure({0.0, 0.42, {}}, d) == doctest::Approx(0.42));  // sin(0) = 0
  // cos(3 pi / 2) = 0 kills the modulation as well.
  CHECK(measure({M_PI / 2.0, 0.5, {}}, d) == doctest::Approx(0.5).epsilon(1e-12));
  // And a generic point where it does not vanish.
  const double t = 1.3;
  CHECK(measure({t, 0.5, {}}, d) ==
        doctest::Approx(0.5 * (1.0 + 0.05 * std::cos(3 * t) * std::sin(t))));
}

TEST_CASE("positive invariance of the physical region") {
  const auto plant = haldane_plant();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> us(0.0, 0.999);
  std::uniform_real_distribution<double> ub(0.01, 2.0);
  std::uniform_real_distribution<double> ud(0.02, 0.2);
  for (int trial = 0; trial < 1000; ++trial) {
    PlantState st{0.0, us(rng), {ub(rng)}};
    const double d = ud(rng);
    bool inside = true;
    for (int i = 0; i < 2000; ++i) {
      st = step(st, d, plant, 0.01);
      inside = inside && st.s >= -1e-9 && st.s <= plant.s_in + 1e-9 &&
               st.b[0] > 0.0;
    }
    CHECK(inside);
  }
}

TEST_CASE("total mass is attracted to s_in at rate d or better") {
  const auto plant = haldane_plant();
  PlantState st{0.0, 0.2, {1.5}};
  const double d = 0.08;
  const double z0 = st.s + st.b[0] - plant.s_in;
  bool bounded = true;
  for (int i = 0; i < 5000; ++i) {
    st = step(st, d, plant, 0.01);
    const double z = st.s + st.b[0] - plant.s_in;
    bounded = bounded && std::abs(z) <= std::abs(z0) * std::exp(-d * st.t) *
                                                (1.0 + 1e-6) +
                                            1e-12;
  }
  CHECK(bounded);
}

TEST_CASE("empty faces are preserved exactly") {
  PlantParams plant{1.0,
                    {GrowthFunction::monod(1.0, 0.1),
                     GrowthFunction::monod(1.5, 0.4)},
                    0.0};
  PlantState st{0.0, 0.4, {0.6, 0.0}};
  for (int i = 0; i < 2000; ++i) st = step(st, 0.3, plant, 0.01);
  CHECK(st.b[1] == 0.0);
  CHECK(st.b[0] > 0.0);
}

TEST_CASE("non-finite or runaway states raise a blow-up error") {
  const auto plant = haldane_plant();
  CHECK_THROWS_AS(step(PlantState{0.0, 25.0, {0.5}}, 0.1, plant, 0.01),
                  NumericalBlowup);
}
