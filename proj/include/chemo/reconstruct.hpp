#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chemo/settle.hpp"

namespace chemo {

struct NoEquilibrium : std::runtime_error {
  NoEquilibrium(const std::string& what, int brackets_found);
  int brackets;
};
struct StalledContinuation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphPoint {
  double s = 0.0;
  double mu_est = 0.0;
  double accepted_at = 0.0;  // model time when the point was recorded
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;  // |s_eq - s_ref| at acceptance, where applicable
};

struct ReconstructedGraph {
  std::vector<GraphPoint> points;
};

// The unique root of d_ref - gain * (s - s_ref) = mu(s) on (0, s_in),
// located by a sign-bracketing scan and bisection to 1e-12. Requires the
// admissibility conditions that make the root unique; zero or multiple
// brackets raise NoEquilibrium.
double equilibrium_oracle(const GrowthFunction& f, const ControllerState& refs,
                          const ControllerConfig& cfg, double s_in);

// mu identified through the oracle route: for each grid abscissa, the input
// reference whose predicted asymptotic output equals the reference output.
std::vector<std::pair<double, double>> oracle_curve(
    const GrowthFunction& f, const ControllerConfig& cfg, double s_in,
    std::span<const double> grid);

// The experimentally defined map (s_ref, d_ref) -> s_eq. The simulated
// implementation advances a live closed loop (states are never reset); the
// oracle implementation answers from the root solve and is used to
// cross-check the step-wise schemes.
struct MapEval {
  double s_eq = 0.0;
  bool settled = true;
};

class EquilibriumMap {
 public:
  virtual MapEval eval(double s_ref, double d_ref) = 0;
  virtual double time() const = 0;
  virtual ~EquilibriumMap() = default;
};

class SimulatedMap : public EquilibriumMap {
 public:
  SimulatedMap(ClosedLoop& loop, SettleConfig settle, double h)
      : loop_(loop), settle_(settle), h_(h) {}
  MapEval eval(double s_ref, double d_ref) override;
  double time() const override { return loop_.time(); }

 private:
  ClosedLoop& loop_;
  SettleConfig settle_;
  double h_;
};

class OracleMap : public EquilibriumMap {
 public:
  OracleMap(GrowthFunction f, ControllerConfig cfg, double s_in)
      : f_(std::move(f)), cfg_(cfg), s_in_(s_in) {}
  MapEval eval(double s_ref, double d_ref) override;
  double time() const override { return 0.0; }

 private:
  GrowthFunction f_;
  ControllerConfig cfg_;
  double s_in_;
};

// Continuous reconstruction: dynamic feedback plus slow reference drift,
// recording (s_ref, d_ref) as the graph estimate.
struct DriftWindow {
  double s_lo = 0.0;
  double s_hi = 1.0;
  double max_time = 1e9;
  double record_every = 1.0;
};

ReconstructedGraph drift_reconstruct(ClosedLoop& loop, const DriftWindow& win,
                                     double h);

// Step-wise reconstruction on a prescribed abscissa grid via Newton iteration
// on the settled-output residual.
struct NewtonConfig {
  std::vector<double> s_grid;
  double tol = 1e-3;
  int max_iters = 12;
  double fd_step = 0.0;     // 0: defaults to 0.01 * (d_max - d_min)
  double d_start = -1.0;    // <0: defaults to the midpoint of [d_min, d_max]
};

ReconstructedGraph newton_reconstruct(const NewtonConfig& nc,
                                      EquilibriumMap& map,
                                      const ControllerConfig& cfg);

// Simplified continuation: unit-secant predictor, one settlement per step,
// corrected point read off the feedback line.
struct SecantConfig {
  double spacing = 0.05;  // desired distance between points along the curve
  int max_points = 40;
  double s_lo = 0.0;
  double s_hi = 1.0;
  double weight_s = 1.0;  // optional rescaling inside the arc-length norm
  double weight_d = 1.0;
};

ReconstructedGraph secant_reconstruct(const SecantConfig& sc,
                                      std::pair<double, double> seed0,
                                      std::pair<double, double> seed1,
                                      EquilibriumMap& map,
                                      const ControllerConfig& cfg);

}  // namespace chemo
