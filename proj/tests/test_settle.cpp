#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "chemo/reconstruct.hpp"
#include "chemo/settle.hpp"

#include <cmath>

using namespace chemo;

namespace {

const PlantParams kPlant{1.0, {GrowthFunction::haldane(1.0, 1.0, 10.0)}, 0.0};
const ControllerConfig kCfg{0.02, 0.2, 1.0, 0.0, 0.0};

}  // namespace

TEST_CASE("stationary start settles after two windows") {
  const double mu = kPlant.growths[0].value(0.3);
  ClosedLoop loop(kPlant, kCfg, FeedbackLaw::simple, {}, {0.0, 0.3, {0.7}},
                  {0.3, mu});
  int windows_seen = 0;
  const SettleResult r = run_until_settled(
      loop, {20.0, 0.9, 500.0, 1e-3}, 0.01,
      [&](const WindowStats& w) { windows_seen = w.index; });
  CHECK(r.settled);
  CHECK(r.windows == 2);
  CHECK(windows_seen == 2);
  CHECK(r.elapsed == doctest::Approx(40.0));
  CHECK(r.s_eq == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r.d_at_eq == doctest::Approx(mu).epsilon(1e-12));
}

TEST_CASE("settled output matches the equilibrium oracle") {
  const ControllerState refs{0.3, 0.13};
  const double s_star = equilibrium_oracle(kPlant.growths[0], refs, kCfg, 1.0);

  SUBCASE("zero disturbance") {
    ClosedLoop loop(kPlant, kCfg, FeedbackLaw::simple, {}, {0.0, 0.35, {0.65}},
                    refs);
    const SettleResult r = run_until_settled(loop, {}, 0.01);
    CHECK(r.settled);
    CHECK(r.windows >= 2);
    CHECK(std::abs(r.s_eq - s_star) < 2e-6);
    CHECK(r.d_at_eq ==
          doctest::Approx(simple_feedback(r.s_eq, refs, kCfg)));
  }

  SUBCASE("disturbed measurements stay within the modulation floor") {
    const Disturbance dist{0.05, 3.0, 1.0};
    ClosedLoop loop(kPlant, kCfg, FeedbackLaw::simple, dist,
                    {0.0, 0.35, {0.65}}, refs);
    const SettleResult r = run_until_settled(loop, {}, 0.01);
    CHECK(r.settled);
    CHECK(std::abs(r.s_eq - s_star) <= 2.0 * dist.amplitude * r.s_eq);
  }
}

TEST_CASE("timeout reports an unsettled result") {
  ClosedLoop loop(kPlant, kCfg, FeedbackLaw::simple, {}, {0.0, 0.9, {0.1}},
                  {0.3, 0.13});
  const SettleResult r = run_until_settled(loop, {20.0, 0.9, 40.0, 1e-3}, 0.01);
  CHECK_FALSE(r.settled);
  CHECK(r.windows == 2);
  CHECK(r.elapsed == doctest::Approx(40.0));
}

TEST_CASE("settlement requires the simple law") {
  ControllerConfig cfg = kCfg;
  cfg.gain_adapt = 2.0;
  ClosedLoop loop(kPlant, cfg, FeedbackLaw::dynamic_adapt, {},
                  {0.0, 0.3, {0.7}}, {0.3, 0.13});
  SettleConfig sc;
  CHECK_THROWS_AS(run_until_settled(loop, sc, 0.01), std::logic_error);
}

TEST_CASE("identification residual") {
  CHECK(residual(0.3, 0.3) == 0.0);
  CHECK(residual(0.31, 0.30) == doctest::Approx(0.01));

  // Sign of the residual as a function of the input reference, read off the
  // oracle: a larger d_ref moves the settled output up.
  const double mu = kPlant.growths[0].value(0.3);
  const double below =
      equilibrium_oracle(kPlant.growths[0], {0.3, mu - 0.01}, kCfg, 1.0) - 0.3;
  const double above =
      equilibrium_oracle(kPlant.growths[0], {0.3, mu + 0.01}, kCfg, 1.0) - 0.3;
  CHECK(below < 0.0);
  CHECK(above > 0.0);
}
